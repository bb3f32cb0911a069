//! Vectors on the unit sphere, halfspace labelling and the two extraction
//! error measures (geometric and uniform).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `| ||w|| - 1 |` accepted by [`UnitVector`].
pub const UNIT_NORM_TOL: f64 = 1e-9;
/// Inputs further than this from unit norm are rejected rather than renormalized.
pub const RENORMALIZE_TOL: f64 = 1e-6;

/// Class identifier. Binary problems use `-1` / `+1`; multiclass problems use
/// small non-negative integers.
pub type ClassId = i32;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn check_vector(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::invalid("vector must have dimension >= 1"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("vector has non-finite entries"));
    }
    Ok(())
}

/// Standard basis vector `e_i` of dimension `d`.
pub fn basis(d: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[i] = 1.0;
    e
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Accepts vectors within [`RENORMALIZE_TOL`] of unit norm and renormalizes them.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        check_vector(&entries)?;
        let n = norm(&entries);
        if (n - 1.0).abs() > RENORMALIZE_TOL {
            return Err(Error::NotUnitNorm(n));
        }
        Ok(UnitVector(entries.into_iter().map(|v| v / n).collect()))
    }

    /// Normalizes an arbitrary nonzero direction.
    pub fn from_direction(entries: Vec<f64>) -> Result<Self> {
        check_vector(&entries)?;
        let n = norm(&entries);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        Ok(UnitVector(entries.into_iter().map(|v| v / n).collect()))
    }

    pub fn basis(d: usize, i: usize) -> Self {
        UnitVector(basis(d, i))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        UnitVector::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(u: UnitVector) -> Self {
        u.0
    }
}

impl std::ops::Deref for UnitVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    /// `sign(0) = +1`.
    pub fn from_score(score: f64) -> Self {
        if score >= 0.0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    /// Maps a binary class id onto a label; any positive id is `Pos`.
    pub fn from_class(c: ClassId) -> Self {
        if c > 0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }

    pub fn class(self) -> ClassId {
        match self {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }
}

/// Homogeneous halfspace `x -> sign(<w, x>)` with unit normal `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub w: UnitVector,
}

impl Halfspace {
    pub fn new(w: UnitVector) -> Self {
        Halfspace { w }
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    pub fn label(&self, x: &[f64]) -> Result<Label> {
        sign_label(self, x)
    }
}

pub fn sign_label(h: &Halfspace, x: &[f64]) -> Result<Label> {
    check_dim(h.dim(), x.len())?;
    Ok(Label::from_score(dot(&h.w, x)))
}

/// `||w_true - w_hat||_2`.
pub fn geometric_error(w_true: &UnitVector, w_hat: &UnitVector) -> Result<f64> {
    check_dim(w_true.dim(), w_hat.dim())?;
    Ok(w_true
        .iter()
        .zip(w_hat.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Monte-Carlo estimate of `Pr[f_hat(x) != f_star(x)]` with `x` drawn from `domain`.
pub fn uniform_error_estimate<R, F, G, S>(
    f_hat: F,
    f_star: G,
    mut domain: S,
    n: usize,
    rng: &mut R,
) -> f64
where
    R: Rng + ?Sized,
    F: Fn(&[f64]) -> ClassId,
    G: Fn(&[f64]) -> ClassId,
    S: FnMut(&mut R) -> Vec<f64>,
{
    if n == 0 {
        return 0.0;
    }
    let mut disagree = 0usize;
    for _ in 0..n {
        let x = domain(rng);
        if f_hat(&x) != f_star(&x) {
            disagree += 1;
        }
    }
    disagree as f64 / n as f64
}

/// Uniform draw from `S^{d-1}` by normalizing a standard Gaussian vector.
pub fn sample_unit_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnitVector {
    assert!(d >= 1, "sphere dimension must be >= 1");
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&g);
        if n > 1e-300 {
            return UnitVector(g.into_iter().map(|v| v / n).collect());
        }
    }
}

/// Uniform draw from an axis-aligned box.
pub fn sample_box<R: Rng + ?Sized>(bounds: &[(f64, f64)], rng: &mut R) -> Vec<f64> {
    bounds
        .iter()
        .map(|&(lo, hi)| if hi > lo { rng.random_range(lo..hi) } else { lo })
        .collect()
}
