//! Line-search extraction of a linear classifier in the style of Lowd and Meek.
//!
//! The attacker finds one instance of each class, bisects the segment between
//! them to a boundary point `x0`, locates a reference coordinate whose unit
//! perturbation changes the label, and then for every other coordinate `k`
//! line-searches `x0 + e_k + t e_ref` for the boundary; `t* = -w_k / w_ref`.
//! Only noise-free oracles are supported.

use rand::Rng;

use super::{ExtractionReport, Outcome, RunMeter};
use crate::error::{Error, Result};
use crate::geometry::{check_dim, sample_unit_sphere, Label, UnitVector};
use crate::oracle::Oracle;

/// Sign-probe attempts before declaring that no opposite-label pair exists.
const WITNESS_ATTEMPTS: usize = 64;
/// Half-width of the line-search bracket, in units of the target precision.
const BRACKET_SCALE: f64 = 1e6;

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(p, q)| p + a * q).collect()
}

pub fn lowd_meek_extract<R: Rng + ?Sized>(
    o: &mut Oracle,
    d: usize,
    eps_ls: f64,
    rng: &mut R,
) -> Result<ExtractionReport> {
    check_dim(o.dim(), d)?;
    if !(eps_ls > 0.0) {
        return Err(Error::invalid(format!("line-search precision {eps_ls} must be positive")));
    }
    let meter = RunMeter::start(o);
    // Per-coordinate precision so the normal vector as a whole lands near eps_ls.
    let tol = eps_ls / (d as f64).sqrt();

    // Opposite-label witnesses: try +-e_1 first, then antipodal random pairs.
    let mut witnesses = None;
    for attempt in 0..WITNESS_ATTEMPTS {
        let x: Vec<f64> = if attempt == 0 {
            crate::geometry::basis(d, 0)
        } else {
            sample_unit_sphere(d, rng).into_inner()
        };
        let neg_x: Vec<f64> = x.iter().map(|v| -v).collect();
        let a = o.query_label(&x)?;
        let b = o.query_label(&neg_x)?;
        if a != b {
            witnesses = Some(if a == Label::Pos { (x, neg_x) } else { (neg_x, x) });
            break;
        }
    }
    let Some((pos, neg)) = witnesses else {
        return Ok(meter.finish(o, Outcome::Fail));
    };

    // Boundary point on the segment pos -> neg.
    let dir: Vec<f64> = neg.iter().zip(&pos).map(|(n, p)| n - p).collect();
    let length = crate::geometry::norm(&dir);
    let steps = (length / tol).log2().ceil().max(1.0) as u32;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if o.query_label(&axpy(&pos, mid, &dir))? == Label::Pos {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x0 = axpy(&pos, 0.5 * (lo + hi), &dir);

    // Reference coordinate: a unit move along it crosses the boundary.
    let mut reference = None;
    for i in 0..d {
        let e = crate::geometry::basis(d, i);
        let up = o.query_label(&axpy(&x0, 1.0, &e))?;
        let down = o.query_label(&axpy(&x0, -1.0, &e))?;
        if up != down {
            reference = Some((i, up));
            break;
        }
    }
    let Some((r, ref_sign)) = reference else {
        return Ok(meter.finish(o, Outcome::Fail));
    };

    // Line search for each remaining weight ratio. Far along +e_ref the label
    // is sign(w_ref), which fixes the bracket orientation without probing.
    let bound = BRACKET_SCALE * eps_ls;
    let e_ref = crate::geometry::basis(d, r);
    let ls_steps = (2.0 * bound / tol).log2().ceil() as u32;
    let mut w = vec![0.0; d];
    w[r] = 1.0;
    for k in (0..d).filter(|&k| k != r) {
        let base = axpy(&x0, 1.0, &crate::geometry::basis(d, k));
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..ls_steps {
            let mid = 0.5 * (lo + hi);
            if o.query_label(&axpy(&base, mid, &e_ref))? == ref_sign {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        w[k] = -0.5 * (lo + hi);
    }
    let sign = ref_sign.value();
    let w: Vec<f64> = w.iter().map(|v| sign * v).collect();
    let mut report = meter.finish(o, Outcome::Success);
    report.w_hat = Some(UnitVector::from_direction(w)?);
    Ok(report)
}
