//! Equation-solving extraction of a regression server that leaks real outputs.

use super::{ExtractionReport, Outcome, RunMeter};
use crate::error::{Error, Result};
use crate::geometry::{basis, check_dim};
use crate::linalg::solve;
use crate::oracle::Oracle;

/// Queries the origin and every basis vector, then solves the resulting
/// `(d+1) x (d+1)` system `[1, x_i] a = y_i`. Uses exactly `d + 1` queries.
pub fn equation_solve_regression(o: &mut Oracle, d: usize) -> Result<(Vec<f64>, ExtractionReport)> {
    if !o.is_leaky() {
        return Err(Error::ModeError("equation solving needs real-valued outputs".into()));
    }
    check_dim(o.dim(), d)?;
    let meter = RunMeter::start(o);
    let mut points = vec![vec![0.0; d]];
    points.extend((0..d).map(|i| basis(d, i)));
    let mut rows = Vec::with_capacity(d + 1);
    let mut rhs = Vec::with_capacity(d + 1);
    for x in &points {
        rhs.push(o.query_real(x)?);
        let mut row = Vec::with_capacity(d + 1);
        row.push(1.0);
        row.extend_from_slice(x);
        rows.push(row);
    }
    let coefficients = solve(rows, rhs)?;
    let mut report = meter.finish(o, Outcome::Success);
    report.coefficients = Some(coefficients.clone());
    Ok((coefficients, report))
}

/// `||a - b||_1`, the regression extraction error.
pub fn l1_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}
