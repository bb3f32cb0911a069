//! Query-synthesis extraction of homogeneous halfspaces by pairwise angular
//! bisection, plus the repeated-query majority vote used against label-flip
//! defenses.
//!
//! For a coordinate pair `(j, k)` the attacker probes points
//! `x(theta) = cos(theta) e_j + sin(theta) e_k`. The label changes where
//! `w_j cos(theta) + w_k sin(theta) = 0`, so locating that angle recovers the
//! ratio `w_k / w_j = -cot(theta*)`. A coarse pass picks a pivot coordinate
//! with a large weight; a full-depth pass then measures every ratio against it.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{ExtractionReport, Outcome, RunMeter};
use crate::analysis::stability::stability_stop;
use crate::error::{Error, Result};
use crate::geometry::{basis, check_dim, Label, UnitVector};
use crate::oracle::Oracle;

pub type Labeler<'a> = dyn FnMut(&[f64]) -> Result<Label> + 'a;

/// Maximum number of coarse passes spent looking for a well-conditioned pivot.
const MAX_COARSE_PASSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopRule {
    /// Bisect every ratio to `depth_full`.
    FixedDepth,
    /// Bisect each ratio until the last `window` iterate moves are all `<= tau`.
    Stability { window: usize, tau: f64, max_depth: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionPlan {
    /// Pivot coordinate for the coarse pass.
    pub pivot: usize,
    pub depth_coarse: u32,
    pub depth_full: u32,
    pub target_eps: f64,
    pub stop: StopRule,
    /// Keep the full-depth probe points in the trace.
    pub record_probes: bool,
}

impl BisectionPlan {
    pub const DEFAULT_COARSE_DEPTH: u32 = 6;

    /// Plan reaching geometric error `eps`: `depth_full = ceil(log2(4 sqrt(d) / eps))`.
    pub fn for_target(d: usize, eps: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be >= 1"));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::invalid(format!("target error {eps} must be positive")));
        }
        let coarse = Self::DEFAULT_COARSE_DEPTH;
        let full = (4.0 * (d as f64).sqrt() / eps).log2().ceil().max(coarse as f64) as u32;
        Ok(BisectionPlan {
            pivot: 0,
            depth_coarse: coarse,
            depth_full: full,
            target_eps: eps,
            stop: StopRule::FixedDepth,
            record_probes: false,
        })
    }

    pub fn with_stability(mut self, window: usize, tau: f64, max_depth: u32) -> Self {
        self.stop = StopRule::Stability { window, tau, max_depth };
        self
    }

    pub fn recording(mut self) -> Self {
        self.record_probes = true;
        self
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.pivot >= d {
            return Err(Error::invalid(format!("pivot {} out of range for d = {d}", self.pivot)));
        }
        if self.depth_coarse < 1 || self.depth_full < self.depth_coarse {
            return Err(Error::invalid("need depth_full >= depth_coarse >= 1"));
        }
        if let StopRule::Stability { window, tau, max_depth } = self.stop {
            if window < 1 || !(tau > 0.0) || max_depth < 1 {
                return Err(Error::invalid("stability rule needs window >= 1, tau > 0, max_depth >= 1"));
            }
        }
        Ok(())
    }

    /// Query count of one noiseless run with a single coarse pass:
    /// `d * (depth_full + depth_coarse + 2)`.
    pub fn base_query_count(&self, d: usize) -> u64 {
        d as u64 * (self.depth_full as u64 + self.depth_coarse as u64 + 2)
    }
}

/// Diagnostics of one query-synthesis run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QsTrace {
    pub pivot: usize,
    pub coarse_passes: usize,
    /// Bisection depth used for each coordinate in the full pass (0 for the pivot).
    pub depths: Vec<u32>,
    /// Full-pass probe points, when recording was requested.
    pub probes: Vec<Vec<f64>>,
}

fn arc_point(d: usize, j: usize, k: usize, theta: f64) -> Vec<f64> {
    let mut x = vec![0.0; d];
    x[j] = theta.cos();
    x[k] = theta.sin();
    x
}

/// Bracket `[lo, hi]` on the arc containing the label change.
#[derive(Debug, Clone)]
struct ArcBracket {
    d: usize,
    j: usize,
    k: usize,
    lo: f64,
    hi: f64,
    lo_label: Label,
}

impl ArcBracket {
    /// `ends` holds the labels at `theta = -pi/2, 0, pi/2`. Returns `None` when
    /// they all agree, i.e. `w_k` is indistinguishable from zero.
    fn new(d: usize, j: usize, k: usize, ends: [Label; 3]) -> Option<Self> {
        let [minus, zero, plus] = ends;
        let (lo, hi, lo_label) = if zero != plus {
            (0.0, FRAC_PI_2, zero)
        } else if zero != minus {
            (-FRAC_PI_2, 0.0, minus)
        } else {
            return None;
        };
        Some(ArcBracket { d, j, k, lo, hi, lo_label })
    }

    fn probe(&self) -> Vec<f64> {
        arc_point(self.d, self.j, self.k, 0.5 * (self.lo + self.hi))
    }

    fn step(&mut self, labeler: &mut Labeler<'_>, probes: Option<&mut Vec<Vec<f64>>>) -> Result<()> {
        let mid = 0.5 * (self.lo + self.hi);
        let x = self.probe();
        let y = labeler(&x)?;
        if let Some(p) = probes {
            p.push(x);
        }
        if y == self.lo_label {
            self.lo = mid;
        } else {
            self.hi = mid;
        }
        Ok(())
    }

    fn ratio(&self) -> f64 {
        let t = 0.5 * (self.lo + self.hi);
        -t.cos() / t.sin()
    }
}

/// Memoized labels of the axis points `+e_i` and `-e_i`.
#[derive(Default)]
struct AxisLabels(HashMap<(usize, bool), Label>);

impl AxisLabels {
    fn get(&mut self, d: usize, i: usize, positive: bool, labeler: &mut Labeler<'_>) -> Result<Label> {
        if let Some(l) = self.0.get(&(i, positive)) {
            return Ok(*l);
        }
        let mut x = basis(d, i);
        if !positive {
            x[i] = -1.0;
        }
        let l = labeler(&x)?;
        self.0.insert((i, positive), l);
        Ok(l)
    }

    fn ends(&mut self, d: usize, j: usize, k: usize, labeler: &mut Labeler<'_>) -> Result<[Label; 3]> {
        Ok([
            self.get(d, k, false, labeler)?,
            self.get(d, j, true, labeler)?,
            self.get(d, k, true, labeler)?,
        ])
    }
}

/// Estimates `w_k / w_j` by bisecting the arc between `e_j` and `+-e_k` down to a
/// bracket of width `(pi/2) 2^-depth`.
pub fn angular_bisect(
    d: usize,
    j: usize,
    k: usize,
    depth: u32,
    labeler: &mut Labeler<'_>,
) -> Result<f64> {
    if j == k || j >= d || k >= d {
        return Err(Error::invalid(format!("invalid coordinate pair ({j}, {k}) for d = {d}")));
    }
    let mut axis = AxisLabels::default();
    let ends = axis.ends(d, j, k, labeler)?;
    let Some(mut bracket) = ArcBracket::new(d, j, k, ends) else {
        return Ok(0.0);
    };
    for _ in 0..depth {
        bracket.step(labeler, None)?;
    }
    Ok(bracket.ratio())
}

fn normalized(v: &[f64]) -> UnitVector {
    UnitVector::from_direction(v.to_vec()).expect("pivot entry keeps the estimate nonzero")
}

fn qs_core(d: usize, plan: &BisectionPlan, labeler: &mut Labeler<'_>) -> Result<(UnitVector, QsTrace)> {
    plan.validate(d)?;
    let mut trace = QsTrace::default();
    let mut axis = AxisLabels::default();

    if d == 1 {
        let l = axis.get(1, 0, true, labeler)?;
        trace.depths = vec![0];
        return Ok((UnitVector::new(vec![l.value()])?, trace));
    }

    // Coarse pass: ratios against the current pivot, clamped at 2^depth_coarse.
    let cap = 2f64.powi(plan.depth_coarse as i32);
    let mut pivot = plan.pivot;
    let mut coarse = vec![0.0; d];
    for pass in 0..MAX_COARSE_PASSES {
        trace.coarse_passes = pass + 1;
        coarse = vec![0.0; d];
        coarse[pivot] = 1.0;
        let mut saturated = false;
        for k in (0..d).filter(|&k| k != pivot) {
            let ends = axis.ends(d, pivot, k, labeler)?;
            let ratio = match ArcBracket::new(d, pivot, k, ends) {
                None => 0.0,
                Some(mut b) => {
                    for _ in 0..plan.depth_coarse {
                        b.step(labeler, None)?;
                    }
                    b.ratio()
                }
            };
            if ratio.abs() >= cap {
                saturated = true;
            }
            coarse[k] = ratio.clamp(-cap, cap);
        }
        let best = (0..d)
            .max_by(|&a, &b| coarse[a].abs().total_cmp(&coarse[b].abs()).then(b.cmp(&a)))
            .unwrap();
        let repeat = saturated && best != pivot;
        let scale = coarse[best];
        for c in coarse.iter_mut() {
            *c /= scale;
        }
        pivot = best;
        if !repeat {
            break;
        }
    }
    trace.pivot = pivot;

    // Full pass against the chosen pivot.
    let sign = axis.get(d, pivot, true, labeler)?.value();
    let mut ratios = coarse.clone();
    ratios[pivot] = 1.0;
    trace.depths = vec![0; d];
    let mut probes = Vec::new();
    for k in (0..d).filter(|&k| k != pivot) {
        let ends = axis.ends(d, pivot, k, labeler)?;
        let Some(mut b) = ArcBracket::new(d, pivot, k, ends) else {
            ratios[k] = 0.0;
            continue;
        };
        let rec = plan.record_probes;
        match plan.stop {
            StopRule::FixedDepth => {
                for _ in 0..plan.depth_full {
                    b.step(labeler, rec.then_some(&mut probes))?;
                }
                trace.depths[k] = plan.depth_full;
            }
            StopRule::Stability { window, tau, max_depth } => {
                let mut history = vec![normalized(&ratios)];
                let mut depth = 0;
                while depth < max_depth {
                    b.step(labeler, rec.then_some(&mut probes))?;
                    depth += 1;
                    ratios[k] = b.ratio();
                    history.push(normalized(&ratios));
                    if stability_stop(&history, window, tau) {
                        break;
                    }
                }
                trace.depths[k] = depth;
            }
        }
        ratios[k] = b.ratio();
    }
    trace.probes = probes;
    let w: Vec<f64> = ratios.iter().map(|r| sign * r).collect();
    Ok((normalized(&w), trace))
}

fn check_target(o: &Oracle, d: usize, eps: f64) -> Result<()> {
    check_dim(o.dim(), d)?;
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("target error {eps} must be positive")));
    }
    Ok(())
}

/// Noise-free query-synthesis extraction. Returns the report and the run trace.
pub fn qs_extract_with_trace(
    o: &mut Oracle,
    d: usize,
    eps: f64,
    plan: &BisectionPlan,
) -> Result<(ExtractionReport, QsTrace)> {
    check_target(o, d, eps)?;
    let meter = RunMeter::start(o);
    let (w, trace) = qs_core(d, plan, &mut |x: &[f64]| o.query_label(x))?;
    let mut report = meter.finish(o, Outcome::Success);
    report.w_hat = Some(w);
    Ok((report, trace))
}

pub fn qs_extract_halfspace(o: &mut Oracle, d: usize, eps: f64, plan: &BisectionPlan) -> Result<ExtractionReport> {
    qs_extract_with_trace(o, d, eps, plan).map(|(r, _)| r)
}

/// Repetitions per instance so that every majority vote of a `q_base`-query
/// attack is correct with probability `1 - delta`:
/// `ceil(8 / (1 - 2 rho)^2 * ln(q_base / delta))`, and 1 for a noiseless oracle.
pub fn repetition_count(rho: f64, q_base: u64, delta: f64) -> Result<u64> {
    if !(rho >= 0.0) {
        return Err(Error::invalid(format!("flip probability {rho} must be >= 0")));
    }
    if rho >= 0.5 {
        return Err(Error::NoiseTooHigh(rho));
    }
    if q_base < 1 {
        return Err(Error::invalid("base query count must be >= 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("confidence parameter {delta} outside (0, 1)")));
    }
    if rho == 0.0 {
        return Ok(1);
    }
    let gap = 1.0 - 2.0 * rho;
    Ok((8.0 / (gap * gap) * (q_base as f64 / delta).ln()).ceil() as u64)
}

/// Queries `x` exactly `r` times and returns the most frequent label, ties to `+1`.
pub fn majority_vote_query(o: &mut Oracle, x: &[f64], r: u64) -> Result<Label> {
    if r < 1 {
        return Err(Error::invalid("majority vote needs r >= 1"));
    }
    let mut pos = 0u64;
    for _ in 0..r {
        if o.query_label(x)? == Label::Pos {
            pos += 1;
        }
    }
    Ok(if 2 * pos >= r { Label::Pos } else { Label::Neg })
}

/// Query-synthesis extraction against a constant label-flip defense with known
/// (or upper-bounded) flip probability `rho`: every label is a majority vote.
pub fn noisy_qs_extract(
    o: &mut Oracle,
    d: usize,
    eps: f64,
    delta: f64,
    rho: f64,
    plan: &BisectionPlan,
) -> Result<ExtractionReport> {
    check_target(o, d, eps)?;
    let r = repetition_count(rho, plan.base_query_count(d), delta)?;
    let meter = RunMeter::start(o);
    let (w, _) = qs_core(d, plan, &mut |x: &[f64]| majority_vote_query(o, x, r))?;
    let mut report = meter.finish(o, Outcome::Success);
    report.w_hat = Some(w);
    Ok(report)
}
