//! Distances of query points to a halfspace's decision boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, dot, norm, UnitVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryStats {
    pub count: usize,
    pub skipped_zero: usize,
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
}

/// Summary of `|<w*, x>| / |x|` over the nonzero points.
pub fn boundary_distance_stats(points: &[Vec<f64>], w_star: &UnitVector) -> Result<BoundaryStats> {
    let mut dist = Vec::with_capacity(points.len());
    let mut skipped_zero = 0;
    for x in points {
        check_dim(w_star.dim(), x.len())?;
        let n = norm(x);
        if n == 0.0 {
            skipped_zero += 1;
            continue;
        }
        dist.push(dot(w_star, x).abs() / n);
    }
    if dist.is_empty() {
        return Err(Error::invalid("no nonzero points to summarize"));
    }
    dist.sort_by(f64::total_cmp);
    let k = dist.len();
    let median = if k % 2 == 1 { dist[k / 2] } else { 0.5 * (dist[k / 2 - 1] + dist[k / 2]) };
    Ok(BoundaryStats {
        count: k,
        skipped_zero,
        min: dist[0],
        median,
        mean: dist.iter().sum::<f64>() / k as f64,
        max: dist[k - 1],
    })
}
