use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mexlab_core::oracle::DefensePolicy;
use mexlab_harness::{AttackKind, ExperimentConfig, ModelKind, SweepAxis, SweepSpec};
use serde_json::Value;

fn mexlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mexlab")).args(args).output().expect("binary runs")
}

fn write_json<T: serde::Serialize>(path: &Path, v: &T) {
    fs::write(path, serde_json::to_string_pretty(v).unwrap()).unwrap();
}

fn qs(d: usize, trials: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ModelKind::Halfspace, AttackKind::Qs, d);
    cfg.trials = trials;
    cfg.seed = 7;
    cfg
}

fn extract(cfg: &ExperimentConfig, dir: &Path, name: &str) -> (Output, Option<Value>) {
    let (cfg_path, out) = (dir.join(format!("{name}.json")), dir.join(format!("{name}.out.json")));
    write_json(&cfg_path, cfg);
    let o = mexlab(&["extract", "--config", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let rec = fs::read_to_string(&out).ok().map(|s| serde_json::from_str(&s).unwrap());
    (o, rec)
}

#[test]
fn extract_succeeds_and_writes_record() {
    let dir = tempfile::tempdir().unwrap();
    let (o, rec) = extract(&qs(10, 5), dir.path(), "qs");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rec = rec.unwrap();
    assert_eq!(rec["aggregates"]["success_rate"], 1.0);
    assert_eq!(rec["trials"].as_array().unwrap().len(), 5);
    assert!(rec["trials"][0]["wall_time"].is_null());
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\"schema_version\": 1, \"model_kind\": ").unwrap();
    let out = dir.path().join("out.json");
    let o = mexlab(&["extract", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_flag_exits_2() {
    assert_eq!(mexlab(&["extract", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(mexlab(&["--help"]).status.code(), Some(0));
}

#[test]
fn exhausted_budget_is_reported_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = qs(10, 1);
    cfg.budget = Some(1);
    let (o, rec) = extract(&cfg, dir.path(), "budget");
    assert_eq!(o.status.code(), Some(1));
    let rec = rec.unwrap();
    assert_eq!(rec["trials"][0]["outcome"], "budget_exceeded");
    assert_eq!(rec["aggregates"]["budget_exceeded_count"], 1);
}

#[test]
fn averaging_attack_fails_under_heavy_noise() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(ModelKind::Halfspace, AttackKind::Average, 5);
    let sigma_hat = 1.0 / 5f64.sqrt();
    cfg.sigma_hat = Some(sigma_hat);
    cfg.defense = DefensePolicy::ModelRandomization { sigma: 20.0 * sigma_hat };
    cfg.eps = 0.3;
    cfg.delta = 0.1;
    cfg.trials = 10;
    let (o, rec) = extract(&cfg, dir.path(), "avg");
    assert_eq!(o.status.code(), Some(1));
    let agg = &rec.unwrap()["aggregates"];
    assert!(agg["fail_count"].as_u64().unwrap() >= 9);
}

#[test]
fn runs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write_json(&cfg, &qs(20, 8));
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("out{threads}.json"));
        let o = Command::new(env!("CARGO_BIN_EXE_mexlab"))
            .env("MEXLAB_THREADS", threads)
            .args(["extract", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        outputs.push(fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn sweep_writes_header_and_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SweepSpec { schema_version: 1, base: qs(8, 3), axis: SweepAxis::Eps, values: vec![0.1, 0.01, 0.001] };
    let (cfg, out) = (dir.path().join("sweep.json"), dir.path().join("sweep.csv"));
    write_json(&cfg, &spec);
    let o = mexlab(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], mexlab_harness::sweep::CSV_COLUMNS);
    assert_eq!(lines.len(), 4);
    let queries: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert!(queries.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn query_log_feeds_rho_and_hotelling() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_owned();
    write_json(&dir.path().join("cfg.json"), &qs(6, 1));
    let o = mexlab(&[
        "extract", "--config", &p("cfg.json"), "--out", &p("rec.json"),
        "--query-log", &p("log.csv"), "--truth-out", &p("truth.json"),
    ]);
    assert_eq!(o.status.code(), Some(0));

    let o = mexlab(&["rho", "--queries", &p("log.csv"), "--w-star", &p("truth.json"), "--sigma", "0.1", "--out", &p("rho.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rho: Value = serde_json::from_str(&fs::read_to_string(p("rho.json")).unwrap()).unwrap();
    let mean = rho["mean_rho"].as_f64().unwrap();
    assert!((0.0..=0.5).contains(&mean));

    let o = mexlab(&["gen", "halfspace", "--d", "6", "--n", "300", "--seed", "3", "--out", &p("sphere.csv")]);
    assert_eq!(o.status.code(), Some(0));
    // The generated CSV carries a label column; strip it for the matrix reader.
    let sphere = fs::read_to_string(p("sphere.csv")).unwrap();
    let stripped: String = sphere.lines().map(|l| format!("{}\n", l.rsplit_once(',').unwrap().0)).collect();
    fs::write(p("sphere_x.csv"), stripped).unwrap();
    let o = mexlab(&["stats", "hotelling", "--a", &p("sphere_x.csv"), "--b", &p("sphere_x.csv"), "--out", &p("t2.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let t2: Value = serde_json::from_str(&fs::read_to_string(p("t2.json")).unwrap()).unwrap();
    assert_eq!(t2["p_value"], 1.0);
}

#[test]
fn gen_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = mexlab(&["gen", "tree", "--d", "4", "--n", "50", "--classes", "3", "--seed", "11", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}
