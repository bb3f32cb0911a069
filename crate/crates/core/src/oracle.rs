//! The server side of an extraction experiment: a hosted model, a defense
//! policy applied per query, and a metered ledger.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, dot, ClassId, Halfspace, Label};
use crate::nonlinear::forest::RandomForest;
use crate::nonlinear::svm::KernelSvmModel;
use crate::nonlinear::tree::DecisionTree;

/// Fixed-point dollar amount in micro-dollars.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dollars {
    micros: u64,
}

impl Dollars {
    pub const ZERO: Dollars = Dollars { micros: 0 };

    pub fn from_micros(micros: u64) -> Self {
        Dollars { micros }
    }

    pub fn micros(self) -> u64 {
        self.micros
    }

    /// Parses a decimal string such as `"0.0001"` exactly.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('$');
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        let bad = || Error::invalid(format!("invalid dollar amount {s:?}"));
        if whole.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let frac_trimmed = frac.trim_end_matches('0');
        if frac_trimmed.len() > 6 {
            return Err(Error::invalid(format!("{s:?} is finer than one micro-dollar")));
        }
        let whole: u64 = if whole.is_empty() { 0 } else { whole.parse().map_err(|_| bad())? };
        let mut frac_micros = 0u64;
        for (i, c) in frac_trimmed.chars().enumerate() {
            frac_micros += (c as u64 - '0' as u64) * 10u64.pow(5 - i as u32);
        }
        whole
            .checked_mul(1_000_000)
            .and_then(|w| w.checked_add(frac_micros))
            .map(Dollars::from_micros)
            .ok_or_else(bad)
    }

    /// Converts a float price, rounding to the nearest micro-dollar.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::invalid(format!("invalid price {x}")));
        }
        let micros = (x * 1e6).round();
        if (micros - x * 1e6).abs() > 1e-6 * micros.max(1.0) {
            return Err(Error::invalid(format!("price {x} is finer than one micro-dollar")));
        }
        Ok(Dollars::from_micros(micros as u64))
    }

    pub fn times(self, count: u64) -> Self {
        Dollars::from_micros(self.micros * count)
    }

    pub fn to_f64(self) -> f64 {
        self.micros as f64 / 1e6
    }
}

impl std::ops::Add for Dollars {
    type Output = Dollars;

    fn add(self, rhs: Dollars) -> Dollars {
        Dollars::from_micros(self.micros + rhs.micros)
    }
}

impl std::iter::Sum for Dollars {
    fn sum<I: Iterator<Item = Dollars>>(iter: I) -> Dollars {
        iter.fold(Dollars::ZERO, |a, b| a + b)
    }
}

/// Shows at least four decimal places, more only when the amount needs them.
impl fmt::Display for Dollars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.micros / 1_000_000;
        let frac = format!("{:06}", self.micros % 1_000_000);
        let mut frac = frac.trim_end_matches('0').to_string();
        while frac.len() < 4 {
            frac.push('0');
        }
        write!(f, "{whole}.{frac}")
    }
}

impl Serialize for Dollars {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Dollars {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Number(f64),
        }
        match Repr::deserialize(d)? {
            Repr::Text(s) => Dollars::parse(&s),
            Repr::Number(x) => Dollars::from_f64(x),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DefensePolicy {
    NoDefense,
    /// Negate the true label with probability `rho` on every query.
    ConstantFlip { rho: f64 },
    /// Answer with a fresh `w' ~ N(w*, sigma^2 I)` on every query.
    ModelRandomization { sigma: f64 },
}

impl DefensePolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DefensePolicy::NoDefense => Ok(()),
            DefensePolicy::ConstantFlip { rho } => {
                if !(0.0..0.5).contains(&rho) {
                    return Err(Error::invalid(format!("flip probability {rho} outside [0, 1/2)")));
                }
                Ok(())
            }
            DefensePolicy::ModelRandomization { sigma } => {
                if !(sigma >= 0.0 && sigma.is_finite()) {
                    return Err(Error::invalid(format!("randomization sigma {sigma} must be >= 0")));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryLedger {
    count: u64,
    price_per_query: Dollars,
    budget: Option<u64>,
}

impl QueryLedger {
    pub fn new(price_per_query: Dollars, budget: Option<u64>) -> Self {
        QueryLedger { count: 0, price_per_query, budget }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn price_per_query(&self) -> Dollars {
        self.price_per_query
    }

    pub fn remaining(&self) -> Option<u64> {
        self.budget.map(|b| b - self.count)
    }

    pub fn cost(&self) -> Dollars {
        ledger_cost(self.count, self.price_per_query)
    }

    fn charge(&mut self) -> Result<()> {
        if let Some(budget) = self.budget {
            if self.count >= budget {
                return Err(Error::BudgetExceeded { budget });
            }
        }
        self.count += 1;
        Ok(())
    }
}

pub fn ledger_cost(count: u64, price: Dollars) -> Dollars {
    price.times(count)
}

/// Affine regression model `a0 + sum_i a_i x_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRegression {
    /// `a0, a1, ..., ad`.
    pub coefficients: Vec<f64>,
}

impl LinearRegression {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() < 2 {
            return Err(Error::invalid("linear regression needs an intercept and d >= 1 weights"));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite regression coefficient"));
        }
        Ok(LinearRegression { coefficients })
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.coefficients[0] + dot(&self.coefficients[1..], x))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServerModel {
    Halfspace(Halfspace),
    KernelSvm(KernelSvmModel),
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
    LinearRegression(LinearRegression),
}

impl ServerModel {
    pub fn dim(&self) -> usize {
        match self {
            ServerModel::Halfspace(h) => h.dim(),
            ServerModel::KernelSvm(m) => m.dim(),
            ServerModel::DecisionTree(t) => t.dim(),
            ServerModel::RandomForest(f) => f.dim(),
            ServerModel::LinearRegression(r) => r.dim(),
        }
    }

    pub fn is_binary(&self) -> bool {
        match self {
            ServerModel::DecisionTree(t) => t.classes().iter().all(|c| *c == 1 || *c == -1),
            _ => true,
        }
    }

    /// Noise-free prediction. Regression models report the sign of their output.
    pub fn predict(&self, x: &[f64]) -> Result<ClassId> {
        check_dim(self.dim(), x.len())?;
        Ok(match self {
            ServerModel::Halfspace(h) => h.label(x)?.class(),
            ServerModel::KernelSvm(m) => m.predict(x)?.class(),
            ServerModel::DecisionTree(t) => t.predict(x),
            ServerModel::RandomForest(f) => f.predict(x).class(),
            ServerModel::LinearRegression(r) => Label::from_score(r.evaluate(x)?).class(),
        })
    }
}

/// Label-only query interface around a server model.
#[derive(Debug, Clone)]
pub struct Oracle {
    model: ServerModel,
    defense: DefensePolicy,
    ledger: QueryLedger,
    leaky: bool,
    rng: ChaCha8Rng,
    log: Option<Vec<Vec<f64>>>,
}

impl Oracle {
    pub fn new(model: ServerModel, defense: DefensePolicy, ledger: QueryLedger, seed: u64) -> Result<Self> {
        defense.validate()?;
        match (&defense, &model) {
            (DefensePolicy::ModelRandomization { .. }, ServerModel::Halfspace(_)) => {}
            (DefensePolicy::ModelRandomization { .. }, _) => {
                return Err(Error::invalid("model randomization requires a halfspace server"));
            }
            (DefensePolicy::ConstantFlip { .. }, m) if !m.is_binary() => {
                return Err(Error::invalid("constant flip requires a binary-label server"));
            }
            _ => {}
        }
        Ok(Oracle {
            model,
            defense,
            ledger,
            leaky: false,
            rng: ChaCha8Rng::seed_from_u64(seed),
            log: None,
        })
    }

    /// Undefended regression server that also exposes its real-valued output.
    pub fn leaky_regression(model: LinearRegression, ledger: QueryLedger, seed: u64) -> Self {
        Oracle {
            model: ServerModel::LinearRegression(model),
            defense: DefensePolicy::NoDefense,
            ledger,
            leaky: true,
            rng: ChaCha8Rng::seed_from_u64(seed),
            log: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn defense(&self) -> DefensePolicy {
        self.defense
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn is_leaky(&self) -> bool {
        self.leaky
    }

    /// Ground truth for scoring. Attack code must not call this.
    pub fn ground_truth(&self) -> &ServerModel {
        &self.model
    }

    /// Starts recording every queried instance.
    pub fn record_queries(&mut self) {
        self.log.get_or_insert_with(Vec::new);
    }

    pub fn query_log(&self) -> &[Vec<f64>] {
        self.log.as_deref().unwrap_or(&[])
    }

    fn admit(&mut self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        self.ledger.charge()?;
        if let Some(log) = self.log.as_mut() {
            log.push(x.to_vec());
        }
        Ok(())
    }

    pub fn query(&mut self, x: &[f64]) -> Result<ClassId> {
        self.admit(x)?;
        match self.defense {
            DefensePolicy::NoDefense => self.model.predict(x),
            DefensePolicy::ConstantFlip { rho } => {
                let y = self.model.predict(x)?;
                // Binary servers only, so negation is the flip.
                if rho > 0.0 && self.rng.random::<f64>() < rho {
                    Ok(-y)
                } else {
                    Ok(y)
                }
            }
            DefensePolicy::ModelRandomization { sigma } => {
                let ServerModel::Halfspace(h) = &self.model else {
                    unreachable!("checked at construction");
                };
                let mut score = 0.0;
                for (wi, xi) in h.w.iter().zip(x) {
                    let noise: f64 = if sigma > 0.0 { self.rng.sample(StandardNormal) } else { 0.0 };
                    score += (wi + sigma * noise) * xi;
                }
                Ok(Label::from_score(score).class())
            }
        }
    }

    pub fn query_label(&mut self, x: &[f64]) -> Result<Label> {
        self.query(x).map(Label::from_class)
    }

    /// Real-valued answer of a leaky regression server.
    pub fn query_real(&mut self, x: &[f64]) -> Result<f64> {
        let ServerModel::LinearRegression(r) = &self.model else {
            return Err(Error::ModeError("real-valued queries need a regression server".into()));
        };
        if !self.leaky {
            return Err(Error::ModeError("oracle does not expose real-valued outputs".into()));
        }
        let r = r.clone();
        self.admit(x)?;
        r.evaluate(x)
    }
}
