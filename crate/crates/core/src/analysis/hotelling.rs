//! Two-sample Hotelling T² test with an F-distribution p-value.

use serde::{Deserialize, Serialize};

use crate::analysis::special::f_survival;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotellingResult {
    pub statistic: f64,
    pub f_statistic: f64,
    /// `(p, n1 + n2 - p - 1)`.
    pub df: (u64, u64),
    pub p_value: f64,
}

fn mean(rows: &[Vec<f64>], p: usize) -> Vec<f64> {
    let mut m = vec![0.0; p];
    for r in rows {
        for (acc, v) in m.iter_mut().zip(r) {
            *acc += v;
        }
    }
    m.iter_mut().for_each(|v| *v /= rows.len() as f64);
    m
}

fn add_scatter(acc: &mut [Vec<f64>], rows: &[Vec<f64>], m: &[f64]) {
    for r in rows {
        let c: Vec<f64> = r.iter().zip(m).map(|(v, mu)| v - mu).collect();
        for i in 0..c.len() {
            for j in 0..=i {
                acc[i][j] += c[i] * c[j];
            }
        }
    }
}

/// `T² = n1 n2 / (n1 + n2) * dᵀ S⁻¹ d` with `S` the pooled covariance plus a
/// ridge of `1e-8 * trace(S) / p`.
pub fn hotelling_t2(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<HotellingResult> {
    let (n1, n2) = (a.len(), b.len());
    if n1 == 0 || n2 == 0 {
        return Err(Error::invalid("both samples need at least one row"));
    }
    let p = a[0].len();
    if p == 0 || a.iter().chain(b).any(|r| r.len() != p) {
        return Err(Error::invalid("samples must share a dimension >= 1"));
    }
    if n1 + n2 <= p + 1 {
        return Err(Error::Precondition(format!("need n1 + n2 > p + 1, got {} with p = {p}", n1 + n2)));
    }
    let (ma, mb) = (mean(a, p), mean(b, p));
    let mut s = vec![vec![0.0; p]; p];
    add_scatter(&mut s, a, &ma);
    add_scatter(&mut s, b, &mb);
    let denom = (n1 + n2 - 2) as f64;
    for i in 0..p {
        for j in 0..=i {
            s[i][j] /= denom;
            s[j][i] = s[i][j];
        }
    }
    let trace: f64 = (0..p).map(|i| s[i][i]).sum();
    if !(trace > 0.0) {
        return Err(Error::Singular("pooled covariance has zero trace".into()));
    }
    let ridge = 1e-8 * trace / p as f64;
    for (i, row) in s.iter_mut().enumerate() {
        row[i] += ridge;
    }
    let l = cholesky(&s)?;
    let diff: Vec<f64> = ma.iter().zip(&mb).map(|(x, y)| x - y).collect();
    let z = cholesky_solve(&l, &diff);
    let quad: f64 = diff.iter().zip(&z).map(|(x, y)| x * y).sum();
    let statistic = (n1 * n2) as f64 / (n1 + n2) as f64 * quad.max(0.0);
    let df2 = (n1 + n2 - p - 1) as f64;
    let f_statistic = df2 / (denom * p as f64) * statistic;
    let p_value = f_survival(f_statistic, p as f64, df2)?;
    Ok(HotellingResult { statistic, f_statistic, df: (p as u64, (n1 + n2 - p - 1) as u64), p_value })
}
