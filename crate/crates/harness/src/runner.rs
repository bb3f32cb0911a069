//! Seeded, independent trials of one experiment and their aggregates.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use mexlab_core::attacks::{
    average_attack, equation_solve_regression, lowd_meek_extract, noisy_qs_extract, qs_extract_halfspace,
    BisectionPlan, ExtractionReport, Outcome,
};
use mexlab_core::attacks::regression::l1_error;
use mexlab_core::datasets::{
    load_csv, random_tree, synth_rbf_labeled, synth_tree_labeled, train_averaged_perceptron, Dataset,
};
use mexlab_core::geometry::{sample_box, sample_unit_sphere, Halfspace, Label};
use mexlab_core::nonlinear::{
    dt_train_weighted, eat_extract_svm, iwal_extract, rf_train_weighted, svm_train, uniform_extract_svm, EatConfig,
};
use mexlab_core::oracle::{Dollars, LinearRegression, Oracle, QueryLedger, ServerModel};
use mexlab_core::Error;

use crate::config::{AttackKind, ExperimentConfig, ModelKind};
use crate::HarnessError;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "MEXLAB_THREADS";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Record wall-clock time per trial (makes output non-reproducible).
    pub timing: bool,
    /// Keep the first trial's query log and ground truth.
    pub capture_first_trial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub outcome: Outcome,
    pub success: bool,
    pub queries: u64,
    pub cost: Dollars,
    pub err2: Option<f64>,
    /// `|a* - a_hat|_1` for the regression baseline.
    pub l1_error: Option<f64>,
    pub accuracy: Option<f64>,
    pub v_norm: Option<f64>,
    pub wall_time: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub fail_count: usize,
    pub budget_exceeded_count: usize,
    pub mean_queries: f64,
    pub std_queries: f64,
    pub total_cost: Dollars,
    pub mean_cost: f64,
    pub mean_err2: Option<f64>,
    pub std_err2: Option<f64>,
    pub mean_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub aggregates: Aggregates,
}

/// What the first trial saw, for the analysis subcommands.
#[derive(Debug, Clone)]
pub struct TrialCapture {
    pub queries: Vec<Vec<f64>>,
    pub truth: ServerModel,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `i`: a function of `(master, i)` only.
pub fn trial_seed(master: u64, i: usize) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(i as u64 ^ 0xA076_1D64_78BD_642F))
}

fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Some((m, var.sqrt()))
}

pub fn aggregate(trials: &[TrialRecord]) -> Aggregates {
    let n = trials.len();
    let successes = trials.iter().filter(|t| t.success).count();
    let queries: Vec<f64> = trials.iter().map(|t| t.queries as f64).collect();
    let (mean_queries, std_queries) = mean_std(&queries).unwrap_or((0.0, 0.0));
    let errs: Vec<f64> = trials.iter().filter_map(|t| t.err2).collect();
    let accs: Vec<f64> = trials.iter().filter_map(|t| t.accuracy).collect();
    let total_cost: Dollars = trials.iter().map(|t| t.cost).sum();
    Aggregates {
        trials: n,
        successes,
        success_rate: if n == 0 { 0.0 } else { successes as f64 / n as f64 },
        fail_count: trials.iter().filter(|t| t.outcome == Outcome::Fail).count(),
        budget_exceeded_count: trials.iter().filter(|t| t.outcome == Outcome::BudgetExceeded).count(),
        mean_queries,
        std_queries,
        total_cost,
        mean_cost: if n == 0 { 0.0 } else { total_cost.to_f64() / n as f64 },
        mean_err2: mean_std(&errs).map(|p| p.0),
        std_err2: mean_std(&errs).map(|p| p.1),
        mean_accuracy: mean_std(&accs).map(|p| p.0),
    }
}

fn load_dataset(cfg: &ExperimentConfig) -> Result<Option<Dataset>, HarnessError> {
    let Some(path) = &cfg.dataset_path else { return Ok(None) };
    let ds = load_csv(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    if ds.dim() != cfg.d {
        return Err(HarnessError::Config(format!("dataset has {} features but d = {}", ds.dim(), cfg.d)));
    }
    Ok(Some(ds))
}

fn unit_box(d: usize) -> Vec<(f64, f64)> {
    vec![(0.0, 1.0); d]
}

fn build_server(cfg: &ExperimentConfig, data: Option<&Dataset>, rng: &mut ChaCha8Rng) -> Result<ServerModel, Error> {
    let d = cfg.d;
    let s = &cfg.server;
    let unit = |ds: &Dataset| vec![1.0; ds.len()];
    Ok(match cfg.model_kind {
        ModelKind::Halfspace => match data {
            Some(ds) => ServerModel::Halfspace(train_averaged_perceptron(ds, s.perceptron_epochs, rng)?),
            None => ServerModel::Halfspace(Halfspace::new(sample_unit_sphere(d, rng))),
        },
        ModelKind::LinearRegression => {
            let coef: Vec<f64> = (0..=d).map(|_| rng.random_range(-10.0..10.0)).collect();
            ServerModel::LinearRegression(LinearRegression::new(coef)?)
        }
        ModelKind::KernelSvm => {
            let ds = match data {
                Some(ds) => ds.clone(),
                None => synth_rbf_labeled(d, s.teacher_size, rng)?,
            };
            let ys: Vec<Label> = ds.labels.iter().map(|&c| Label::from_class(c)).collect();
            ServerModel::KernelSvm(svm_train(&ds.features, &ys, &cfg.eat.svm)?)
        }
        ModelKind::DecisionTree => match data {
            Some(ds) => ServerModel::DecisionTree(dt_train_weighted(
                &ds.features,
                &ds.labels,
                &unit(ds),
                &cfg.iwal.learner.tree,
            )?),
            None => ServerModel::DecisionTree(random_tree(d, s.tree_depth, s.n_classes, rng)?),
        },
        ModelKind::RandomForest => {
            let ds = match data {
                Some(ds) => ds.clone(),
                None => synth_tree_labeled(d, s.teacher_size, s.tree_depth, 2, rng)?.0,
            };
            ServerModel::RandomForest(rf_train_weighted(
                &ds.features,
                &ds.labels,
                &unit(&ds),
                s.forest_trees,
                &cfg.iwal.learner.tree,
                rng,
            )?)
        }
    })
}

struct AttackResult {
    report: ExtractionReport,
    l1: Option<f64>,
}

fn plan_for(cfg: &ExperimentConfig) -> Result<BisectionPlan, Error> {
    let mut plan = BisectionPlan::for_target(cfg.d, cfg.eps)?;
    plan.stop = cfg.qs.stop;
    plan.validate(cfg.d)?;
    Ok(plan)
}

fn run_attack(
    cfg: &ExperimentConfig,
    o: &mut Oracle,
    data: Option<&Dataset>,
    rng: &mut ChaCha8Rng,
) -> Result<AttackResult, Error> {
    let d = cfg.d;
    let plain = |report| Ok(AttackResult { report, l1: None });
    match cfg.attack_kind {
        AttackKind::Qs => plain(qs_extract_halfspace(o, d, cfg.eps, &plan_for(cfg)?)?),
        AttackKind::NoisyQs => plain(noisy_qs_extract(o, d, cfg.eps, cfg.delta, cfg.attack_rho(), &plan_for(cfg)?)?),
        AttackKind::Average => plain(average_attack(o, d, cfg.attack_sigma_hat(), cfg.eps, cfg.delta, rng)?),
        AttackKind::LowdMeek => plain(lowd_meek_extract(o, d, cfg.lowd_meek.eps_ls.unwrap_or(cfg.eps), rng)?),
        AttackKind::EquationSolving => {
            let (coef, report) = equation_solve_regression(o, d)?;
            let ServerModel::LinearRegression(truth) = o.ground_truth() else {
                unreachable!("validated: regression attack on a regression server")
            };
            Ok(AttackResult { l1: Some(l1_error(&truth.coefficients, &coef)), report })
        }
        AttackKind::Eat | AttackKind::UniformSvm => {
            let domain = data.map_or_else(|| vec![(-1.0, 1.0); d], |ds| ds.domain_box.clone());
            let eat = EatConfig {
                domain_box: domain,
                r_init: cfg.eat.r_init,
                k: cfg.eat.k,
                budget: cfg.budget.expect("validated"),
                svm: cfg.eat.svm,
                test_size: cfg.eat.test_size,
            };
            let out = if cfg.attack_kind == AttackKind::Eat {
                eat_extract_svm(o, &eat, rng)?
            } else {
                uniform_extract_svm(o, &eat, rng)?
            };
            plain(out.report)
        }
        AttackKind::Iwal => {
            let (pool, test) = match data {
                Some(ds) => (ds.features.clone(), ds.features.clone()),
                None => {
                    let bx = unit_box(d);
                    let pool: Vec<Vec<f64>> = (0..cfg.iwal.pool_size).map(|_| sample_box(&bx, rng)).collect();
                    let test: Vec<Vec<f64>> = (0..cfg.iwal.test_size).map(|_| sample_box(&bx, rng)).collect();
                    (pool, test)
                }
            };
            let mut learner = cfg.iwal.learner.clone();
            if learner.budget.is_none() {
                learner.budget = cfg.budget;
            }
            plain(iwal_extract(o, &pool, &learner, &test, rng)?.report)
        }
    }
}

fn succeeded(cfg: &ExperimentConfig, r: &AttackResult) -> bool {
    match cfg.attack_kind {
        AttackKind::EquationSolving => r.l1.is_some_and(|e| e <= cfg.eps),
        AttackKind::Eat | AttackKind::UniformSvm | AttackKind::Iwal => {
            r.report.accuracy.is_some_and(|a| 1.0 - a <= cfg.eps)
        }
        _ => r.report.outcome == Outcome::Success && r.report.err2.is_some_and(|e| e <= cfg.eps),
    }
}

fn run_trial(
    cfg: &ExperimentConfig,
    data: Option<&Dataset>,
    index: usize,
    opts: RunOptions,
) -> (TrialRecord, Option<TrialCapture>) {
    let started = Instant::now();
    let seed = trial_seed(cfg.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut record = TrialRecord {
        index,
        seed,
        outcome: Outcome::Fail,
        success: false,
        queries: 0,
        cost: Dollars::default(),
        err2: None,
        l1_error: None,
        accuracy: None,
        v_norm: None,
        wall_time: None,
        error: None,
    };
    let model = match build_server(cfg, data, &mut rng) {
        Ok(m) => m,
        Err(e) => {
            record.error = Some(format!("building the server: {e}"));
            return (record, None);
        }
    };
    let ledger = QueryLedger::new(cfg.price_per_query, cfg.budget);
    let oracle_seed: u64 = rng.random();
    let oracle = match &model {
        ServerModel::LinearRegression(r) => Ok(Oracle::leaky_regression(r.clone(), ledger, oracle_seed)),
        _ => Oracle::new(model.clone(), cfg.defense, ledger, oracle_seed),
    };
    let mut o = match oracle {
        Ok(o) => o,
        Err(e) => {
            record.error = Some(format!("building the oracle: {e}"));
            return (record, None);
        }
    };
    let capture = opts.capture_first_trial && index == 0;
    if capture {
        o.record_queries();
    }
    match run_attack(cfg, &mut o, data, &mut rng) {
        Ok(mut r) => {
            if let ServerModel::Halfspace(h) = o.ground_truth() {
                r.report.score_against(h);
            }
            record.success = succeeded(cfg, &r);
            record.outcome = r.report.outcome;
            record.err2 = r.report.err2;
            record.l1_error = r.l1;
            record.accuracy = r.report.accuracy;
            record.v_norm = r.report.v_norm;
        }
        Err(Error::BudgetExceeded { .. }) => record.outcome = Outcome::BudgetExceeded,
        Err(e) => record.error = Some(e.to_string()),
    }
    record.queries = o.ledger().count();
    record.cost = o.ledger().cost();
    if opts.timing {
        record.wall_time = Some(started.elapsed().as_secs_f64());
    }
    let captured = capture.then(|| TrialCapture { queries: o.query_log().to_vec(), truth: model });
    (record, captured)
}

/// Worker threads: `MEXLAB_THREADS` when set to a positive integer, else rayon's default.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunRecord, HarnessError> {
    run_experiment_with(cfg, RunOptions::default()).map(|(r, _)| r)
}

/// Runs `cfg.trials` independent trials, in parallel, and folds them in index order.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    opts: RunOptions,
) -> Result<(RunRecord, Option<TrialCapture>), HarnessError> {
    cfg.validate()?;
    let data = load_dataset(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let results: Vec<(TrialRecord, Option<TrialCapture>)> = pool.install(|| {
        (0..cfg.trials).into_par_iter().map(|i| run_trial(cfg, data.as_ref(), i, opts)).collect()
    });
    let mut capture = None;
    let mut trials = Vec::with_capacity(results.len());
    for (t, c) in results {
        trials.push(t);
        capture = capture.or(c);
    }
    let aggregates = aggregate(&trials);
    Ok((RunRecord { config: cfg.clone(), trials, aggregates }, capture))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_seeds_differ_and_are_stable() {
        let a: Vec<u64> = (0..100).map(|i| trial_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_eq!(trial_seed(7, 3), a[3]);
        assert_ne!(trial_seed(8, 3), a[3]);
    }

    #[test]
    fn aggregates_follow_trials() {
        let base = TrialRecord {
            index: 0,
            seed: 0,
            outcome: Outcome::Success,
            success: true,
            queries: 10,
            cost: Dollars::parse("0.001").unwrap(),
            err2: Some(0.1),
            l1_error: None,
            accuracy: None,
            v_norm: None,
            wall_time: None,
            error: None,
        };
        let other = TrialRecord { success: false, outcome: Outcome::Fail, queries: 30, err2: Some(0.3), ..base.clone() };
        let agg = aggregate(&[base, other]);
        assert_eq!((agg.trials, agg.successes, agg.fail_count), (2, 1, 1));
        assert_eq!(agg.success_rate, 0.5);
        assert_eq!(agg.mean_queries, 20.0);
        assert_eq!(agg.total_cost, Dollars::parse("0.002").unwrap());
        assert!((agg.mean_err2.unwrap() - 0.2).abs() < 1e-15);
    }
}
