//! Per-query flip probability of a model-randomizing server.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, dot, norm, Label, UnitVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub x: Vec<f64>,
    pub rho_hat: f64,
    pub n_samples: u64,
}

/// Fraction of `n` draws `w ~ N(w*, sigma² I)` whose label at `x` differs
/// from the label under `w*`.
pub fn estimate_rho<R: Rng + ?Sized>(
    w_star: &UnitVector,
    x: &[f64],
    sigma: f64,
    n: u64,
    rng: &mut R,
) -> Result<RhoEstimate> {
    check_dim(w_star.dim(), x.len())?;
    if n == 0 || !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("estimate_rho needs n >= 1 and a finite sigma >= 0"));
    }
    let base = dot(w_star, x);
    let truth = Label::from_score(base);
    // <w, x> = <w*, x> + sigma <z, x> and <z, x> ~ N(0, |x|²), so one scalar
    // draw per model has the same law as drawing the full vector.
    let spread = sigma * norm(x);
    let mut flips = 0u64;
    if spread > 0.0 {
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            if Label::from_score(base + spread * z) != truth {
                flips += 1;
            }
        }
    }
    Ok(RhoEstimate { x: x.to_vec(), rho_hat: flips as f64 / n as f64, n_samples: n })
}
