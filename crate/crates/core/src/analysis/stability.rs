//! Stopping rule based on successive model iterates.

use crate::geometry::UnitVector;

/// True iff the last `n` consecutive moves `|w_i - w_{i+1}|` are all at most `tau`.
/// Histories shorter than `n + 1` never stop.
pub fn stability_stop(history: &[UnitVector], n: usize, tau: f64) -> bool {
    if n == 0 || history.len() < n + 1 {
        return false;
    }
    history[history.len() - n - 1..].windows(2).all(|pair| {
        let step: f64 = pair[0].iter().zip(pair[1].iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        step.sqrt() <= tau
    })
}
