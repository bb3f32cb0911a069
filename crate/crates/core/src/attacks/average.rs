//! Passive averaging attack against a randomized-model defense.
//!
//! Draws `m` uniform points on the sphere, queries each once, and returns the
//! direction of `v = (1/m) sum y_i x_i`. A short `v` signals that the assumed
//! noise bound `sigma_hat` is too small and the run is declared a failure.

use std::f64::consts::PI;

use rand::Rng;

use super::{ExtractionReport, Outcome, RunMeter};
use crate::error::{Error, Result};
use crate::geometry::{check_dim, norm, sample_unit_sphere, UnitVector};
use crate::oracle::Oracle;

/// `m = (15 pi)^2 / eps^2 * d * max(1, d sigma_hat^2) * ln(2d / delta)`, rounded up.
pub fn average_sample_size(d: usize, sigma_hat: f64, eps: f64, delta: f64) -> Result<u64> {
    check_average_params(d, sigma_hat, eps, delta)?;
    let df = d as f64;
    let m = (15.0 * PI).powi(2) / (eps * eps)
        * df
        * (df * sigma_hat * sigma_hat).max(1.0)
        * (2.0 * df / delta).ln();
    Ok(m.ceil() as u64)
}

/// Length threshold `l = 1 / (12 d sigma_hat)` below which the attack reports failure.
pub fn average_length_threshold(d: usize, sigma_hat: f64) -> f64 {
    1.0 / (12.0 * d as f64 * sigma_hat)
}

fn check_average_params(d: usize, sigma_hat: f64, eps: f64, delta: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    // Small slack so that sigma_hat = 1/sqrt(d) computed in floating point is accepted.
    if !(sigma_hat * (d as f64).sqrt() >= 1.0 - 1e-12) {
        return Err(Error::Precondition(format!(
            "sigma_hat = {sigma_hat} is below 1/sqrt(d) = {}",
            1.0 / (d as f64).sqrt()
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("target error {eps} must be positive")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("confidence parameter {delta} outside (0, 1)")));
    }
    Ok(())
}

pub fn average_attack<R: Rng + ?Sized>(
    o: &mut Oracle,
    d: usize,
    sigma_hat: f64,
    eps: f64,
    delta: f64,
    rng: &mut R,
) -> Result<ExtractionReport> {
    check_dim(o.dim(), d)?;
    let m = average_sample_size(d, sigma_hat, eps, delta)?;
    let meter = RunMeter::start(o);
    let mut v = vec![0.0; d];
    for _ in 0..m {
        let x = sample_unit_sphere(d, rng);
        let y = o.query_label(&x)?.value();
        for (vi, xi) in v.iter_mut().zip(x.iter()) {
            *vi += y * xi;
        }
    }
    for vi in v.iter_mut() {
        *vi /= m as f64;
    }
    let length = norm(&v);
    let outcome = if length >= average_length_threshold(d, sigma_hat) && length > 0.0 {
        Outcome::Success
    } else {
        Outcome::Fail
    };
    let mut report = meter.finish(o, outcome);
    report.v_norm = Some(length);
    if outcome == Outcome::Success {
        report.w_hat = Some(UnitVector::from_direction(v)?);
    }
    Ok(report)
}
