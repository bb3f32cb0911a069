//! Extended adaptive training: SVM extraction by active selection of the
//! candidate closest to the current decision boundary.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attacks::{ExtractionReport, Outcome, RunMeter};
use crate::error::{Error, Result};
use crate::geometry::{check_dim, sample_box, ClassId, Label};
use crate::nonlinear::svm::{svm_train, KernelSvmModel, SvmParams};
use crate::oracle::{Oracle, ServerModel};

/// Extra single-point draws allowed while the seed set holds one class only.
pub const RESAMPLE_CAP: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EatConfig {
    pub domain_box: Vec<(f64, f64)>,
    /// Seed-set size; `None` means `max(20, d + 1)`.
    #[serde(default)]
    pub r_init: Option<usize>,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Total label queries allowed, seed set included.
    pub budget: u64,
    #[serde(default)]
    pub svm: SvmParams,
    /// Held-out uniform points used to measure agreement with the server.
    #[serde(default = "default_test_size")]
    pub test_size: usize,
}

fn default_k() -> usize {
    100
}

fn default_test_size() -> usize {
    2000
}

impl EatConfig {
    pub fn new(domain_box: Vec<(f64, f64)>, budget: u64, svm: SvmParams) -> Self {
        EatConfig { domain_box, r_init: None, k: default_k(), budget, svm, test_size: default_test_size() }
    }

    pub fn seed_size(&self) -> usize {
        self.r_init.unwrap_or_else(|| 20.max(self.domain_box.len() + 1))
    }

    fn validate(&self, d: usize) -> Result<()> {
        check_dim(d, self.domain_box.len())?;
        if self.domain_box.iter().any(|(lo, hi)| !(lo <= hi && lo.is_finite() && hi.is_finite())) {
            return Err(Error::invalid("domain box needs finite lo <= hi per feature"));
        }
        if self.k == 0 {
            return Err(Error::invalid("candidate count k must be >= 1"));
        }
        if self.budget <= self.seed_size() as u64 {
            return Err(Error::Precondition("EAT budget must exceed the seed-set size".into()));
        }
        Ok(())
    }
}

/// One active-selection round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EatRound {
    /// Training-set size after the round's point was added.
    pub train_size: usize,
    pub selected_abs_presign: f64,
    pub candidate_min_abs_presign: f64,
}

#[derive(Debug, Clone)]
pub struct SvmExtraction {
    pub model: KernelSvmModel,
    pub report: ExtractionReport,
    pub rounds: Vec<EatRound>,
}

/// Fraction of `points` on which `predict` matches the server's noise-free label.
pub fn agreement(truth: &ServerModel, points: &[Vec<f64>], predict: impl Fn(&[f64]) -> ClassId) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::invalid("agreement needs at least one point"));
    }
    let mut hits = 0usize;
    for x in points {
        if truth.predict(x)? == predict(x) {
            hits += 1;
        }
    }
    Ok(hits as f64 / points.len() as f64)
}

fn query_binary(o: &mut Oracle, x: &[f64]) -> Result<Label> {
    match o.query(x)? {
        1 => Ok(Label::Pos),
        -1 => Ok(Label::Neg),
        c => Err(Error::invalid(format!("EAT needs a binary server, got class {c}"))),
    }
}

/// Stage 0: `r_init` uniform points, topped up one point at a time until
/// both labels are present.
fn seed_set<R: Rng + ?Sized>(
    o: &mut Oracle,
    cfg: &EatConfig,
    rng: &mut R,
) -> Result<(Vec<Vec<f64>>, Vec<Label>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for _ in 0..cfg.seed_size() {
        let x = sample_box(&cfg.domain_box, rng);
        ys.push(query_binary(o, &x)?);
        xs.push(x);
    }
    let mut extra = 0;
    while !(ys.contains(&Label::Pos) && ys.contains(&Label::Neg)) {
        if extra == RESAMPLE_CAP {
            return Err(Error::SingleClass);
        }
        let x = sample_box(&cfg.domain_box, rng);
        ys.push(query_binary(o, &x)?);
        xs.push(x);
        extra += 1;
    }
    Ok((xs, ys))
}

fn finish<R: Rng + ?Sized>(
    o: &Oracle,
    meter: &RunMeter,
    model: KernelSvmModel,
    rounds: Vec<EatRound>,
    cfg: &EatConfig,
    rng: &mut R,
) -> Result<SvmExtraction> {
    let test: Vec<Vec<f64>> = (0..cfg.test_size.max(1)).map(|_| sample_box(&cfg.domain_box, rng)).collect();
    let mut report = meter.finish(o, Outcome::Success);
    report.accuracy = Some(agreement(o.ground_truth(), &test, |x| {
        model.predict(x).map(Label::class).unwrap_or(0)
    })?);
    Ok(SvmExtraction { model, report, rounds })
}

/// Runs EAT until `cfg.budget` labels have been bought, retraining from
/// scratch after every new label.
pub fn eat_extract_svm<R: Rng + ?Sized>(o: &mut Oracle, cfg: &EatConfig, rng: &mut R) -> Result<SvmExtraction> {
    let d = o.dim();
    cfg.validate(d)?;
    let meter = RunMeter::start(o);
    let (mut xs, mut ys) = seed_set(o, cfg, rng)?;
    let mut model = svm_train(&xs, &ys, &cfg.svm)?;
    let mut rounds = Vec::new();
    while meter.queries(o) < cfg.budget {
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut min_abs = f64::INFINITY;
        for _ in 0..cfg.k {
            let x = sample_box(&cfg.domain_box, rng);
            let s = model.presign(&x)?.abs();
            min_abs = min_abs.min(s);
            if best.as_ref().is_none_or(|(_, b)| s < *b) {
                best = Some((x, s));
            }
        }
        let (x, s) = best.expect("k >= 1");
        debug_assert_eq!(s, min_abs);
        ys.push(query_binary(o, &x)?);
        xs.push(x);
        model = svm_train(&xs, &ys, &cfg.svm)?;
        rounds.push(EatRound { train_size: xs.len(), selected_abs_presign: s, candidate_min_abs_presign: min_abs });
    }
    finish(o, &meter, model, rounds, cfg, rng)
}

/// Baseline at equal budget: the same seed stage, then uniform points only.
pub fn uniform_extract_svm<R: Rng + ?Sized>(
    o: &mut Oracle,
    cfg: &EatConfig,
    rng: &mut R,
) -> Result<SvmExtraction> {
    let d = o.dim();
    cfg.validate(d)?;
    let meter = RunMeter::start(o);
    let (mut xs, mut ys) = seed_set(o, cfg, rng)?;
    while meter.queries(o) < cfg.budget {
        let x = sample_box(&cfg.domain_box, rng);
        ys.push(query_binary(o, &x)?);
        xs.push(x);
    }
    let model = svm_train(&xs, &ys, &cfg.svm)?;
    finish(o, &meter, model, Vec::new(), cfg, rng)
}
