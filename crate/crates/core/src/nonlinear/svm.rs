//! RBF-kernel soft-margin SVM: the model type exposing the pre-sign score and
//! an SMO trainer with second-order working-set selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, Label};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// Signed coefficients `alpha_i y_i`.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
}

pub fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

impl KernelSvmModel {
    pub fn new(
        support_vectors: Vec<Vec<f64>>,
        coefficients: Vec<f64>,
        bias: f64,
        gamma: f64,
        c: f64,
    ) -> Result<Self> {
        if support_vectors.is_empty() || support_vectors.len() != coefficients.len() {
            return Err(Error::invalid("need one coefficient per support vector and at least one"));
        }
        let d = support_vectors[0].len();
        if d == 0 || support_vectors.iter().any(|s| s.len() != d) {
            return Err(Error::invalid("support vectors must share a dimension >= 1"));
        }
        let finite = support_vectors.iter().flatten().chain(&coefficients).all(|v| v.is_finite());
        if !finite || !bias.is_finite() || !(gamma > 0.0) || !(c > 0.0) {
            return Err(Error::invalid("SVM parameters must be finite with gamma, C > 0"));
        }
        Ok(KernelSvmModel { support_vectors, coefficients, bias, gamma, c })
    }

    pub fn dim(&self) -> usize {
        self.support_vectors[0].len()
    }

    /// `sum_i alpha_i K(x, x_i) + b`.
    pub fn presign(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, a)| a * rbf(self.gamma, sv, x))
            .sum::<f64>()
            + self.bias)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        self.presign(x).map(Label::from_score)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    /// Iteration cap, in multiples of the training-set size.
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 10.0, gamma: 0.5, tol: 1e-3, max_passes: 1000 }
    }
}

const TAU: f64 = 1e-12;

/// Dual state after SMO; kept separate so tests can inspect KKT conditions.
struct SmoSolution {
    alpha: Vec<f64>,
    grad: Vec<f64>,
    rho: f64,
}

fn smo(kernel: &[Vec<f64>], y: &[f64], c: f64, tol: f64, max_iter: usize) -> SmoSolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    for _ in 0..max_iter {
        // i maximizes -y G over I_up.
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            if low(alpha[t], y[t]) {
                gmin = gmin.min(-y[t] * grad[t]);
            }
        }
        if i == usize::MAX || gmax - gmin < tol {
            break;
        }
        // j minimizes the second-order decrease over I_low.
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !low(alpha[t], y[t]) {
                continue;
            }
            let b = gmax + y[t] * grad[t];
            if b > 0.0 {
                let mut a = kernel[i][i] + kernel[t][t] - 2.0 * kernel[i][t];
                if a <= 0.0 {
                    a = TAU;
                }
                let score = -b * b / a;
                if score < best {
                    best = score;
                    j = t;
                }
            }
        }
        if j == usize::MAX {
            break;
        }
        let qij = y[i] * y[j] * kernel[i][j];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = kernel[i][i] + kernel[j][j] + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = kernel[i][i] + kernel[j][j] - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for k in 0..n {
            grad[k] += y[i] * y[k] * kernel[i][k] * di + y[j] * y[k] * kernel[j][k] * dj;
        }
    }

    // Offset from free vectors, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { 0.5 * (ub + lb) };
    SmoSolution { alpha, grad, rho }
}

fn validate_training(xs: &[Vec<f64>], ys: &[Label], params: &SvmParams) -> Result<()> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::invalid("training set must be nonempty with one label per row"));
    }
    let d = xs[0].len();
    if xs.iter().any(|x| x.len() != d) {
        return Err(Error::invalid("training rows must share a dimension"));
    }
    if !ys.contains(&Label::Pos) || !ys.contains(&Label::Neg) {
        return Err(Error::SingleClass);
    }
    if !(params.c > 0.0 && params.gamma > 0.0 && params.tol > 0.0) {
        return Err(Error::invalid("SVM needs C, gamma, tol > 0"));
    }
    Ok(())
}

/// Trains a soft-margin RBF SVM. Deterministic: no randomness is involved.
pub fn svm_train(xs: &[Vec<f64>], ys: &[Label], params: &SvmParams) -> Result<KernelSvmModel> {
    validate_training(xs, ys, params)?;
    let n = xs.len();
    let kernel: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| rbf(params.gamma, &xs[i], &xs[j])).collect())
        .collect();
    let y: Vec<f64> = ys.iter().map(|l| l.value()).collect();
    let max_iter = params.max_passes.max(1).saturating_mul(n.max(10));
    let sol = smo(&kernel, &y, params.c, params.tol, max_iter);
    let mut svs = Vec::new();
    let mut coefs = Vec::new();
    for t in 0..n {
        if sol.alpha[t] > 0.0 {
            svs.push(xs[t].clone());
            coefs.push(sol.alpha[t] * y[t]);
        }
    }
    if svs.is_empty() {
        // All multipliers zero only when the optimum is trivial; keep a valid model.
        svs.push(xs[0].clone());
        coefs.push(0.0);
    }
    debug_assert!(sol.grad.iter().all(|g| g.is_finite()));
    KernelSvmModel::new(svs, coefs, -sol.rho, params.gamma, params.c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dot;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn presign_examples() {
        let m = KernelSvmModel::new(vec![vec![0.3, -1.0]], vec![1.0], 0.0, 2.0, 1.0).unwrap();
        assert!((m.presign(&[0.3, -1.0]).unwrap() - 1.0).abs() < 1e-15);
        let z = KernelSvmModel::new(vec![vec![1.0, 2.0]], vec![0.0], 0.7, 1.0, 1.0).unwrap();
        assert!((z.presign(&[5.0, 5.0]).unwrap() - 0.7).abs() < 1e-15);
        assert!(z.presign(&[5.0]).is_err());
    }

    #[test]
    fn presign_two_support_vectors_by_hand() {
        let m = KernelSvmModel::new(
            vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            vec![0.8, -1.3],
            0.25,
            0.5,
            1.0,
        )
        .unwrap();
        let x = [0.5, -0.5];
        // |x - a|^2 = 0.5, |x - b|^2 = 0.25 + 2.25 = 2.5
        let expected = 0.8 * (-0.25f64).exp() - 1.3 * (-1.25f64).exp() + 0.25;
        assert!((m.presign(&x).unwrap() - expected).abs() < 1e-12);
        assert_eq!(m.predict(&x).unwrap(), Label::from_score(expected));
    }

    #[test]
    fn separates_two_points() {
        let xs = vec![vec![-1.0, 0.0], vec![1.0, 0.0]];
        let ys = vec![Label::Neg, Label::Pos];
        let m = svm_train(&xs, &ys, &SvmParams::default()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(m.predict(x).unwrap(), *y);
        }
    }

    #[test]
    fn solves_xor() {
        let xs = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let ys = vec![Label::Pos, Label::Pos, Label::Neg, Label::Neg];
        let params = SvmParams { c: 10.0, gamma: 1.0, ..SvmParams::default() };
        let m = svm_train(&xs, &ys, &params).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(m.predict(x).unwrap(), *y);
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let xs = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            svm_train(&xs, &[Label::Pos, Label::Pos], &SvmParams::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn kkt_conditions_hold_at_termination() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<Vec<f64>> = (0..80)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let ys: Vec<f64> = xs.iter().map(|x| if x[0] * x[0] + x[1] * x[1] < 0.5 { 1.0 } else { -1.0 }).collect();
        let gamma = 2.0;
        let c = 5.0;
        let tol = 1e-3;
        let kernel: Vec<Vec<f64>> = xs.iter().map(|a| xs.iter().map(|b| rbf(gamma, a, b)).collect()).collect();
        let sol = smo(&kernel, &ys, c, tol, 1_000_000);
        // Maximal violating pair gap below tol.
        let mut m = f64::NEG_INFINITY;
        let mut big_m = f64::INFINITY;
        for t in 0..xs.len() {
            let v = -ys[t] * sol.grad[t];
            let a = sol.alpha[t];
            if (ys[t] > 0.0 && a < c) || (ys[t] < 0.0 && a > 0.0) {
                m = m.max(v);
            }
            if (ys[t] > 0.0 && a > 0.0) || (ys[t] < 0.0 && a < c) {
                big_m = big_m.min(v);
            }
        }
        assert!(m - big_m < tol);
        let balance: f64 = sol.alpha.iter().zip(&ys).map(|(a, y)| a * y).sum();
        assert!(balance.abs() < 1e-9);
        assert!(sol.alpha.iter().all(|a| (0.0..=c).contains(a)));
    }

    #[test]
    fn linearly_separable_agrees_with_margin_reference() {
        // Reference separator: the generating line, with a margin gap around it.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w = [0.6, -0.8];
        let draw = |n: usize, rng: &mut ChaCha8Rng| {
            let mut xs = Vec::new();
            while xs.len() < n {
                let x = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                if dot(&w, &x).abs() > 0.1 {
                    xs.push(x);
                }
            }
            xs
        };
        let xs = draw(100, &mut rng);
        let ys: Vec<Label> = xs.iter().map(|x| Label::from_score(dot(&w, x))).collect();
        let params = SvmParams { c: 100.0, gamma: 0.5, ..SvmParams::default() };
        let m = svm_train(&xs, &ys, &params).unwrap();
        let test = draw(2000, &mut rng);
        let agree = test
            .iter()
            .filter(|x| m.predict(x).unwrap() == Label::from_score(dot(&w, x)))
            .count();
        assert!(agree as f64 / test.len() as f64 >= 0.98, "{agree}");
    }
}
