//! Halfspace extraction attacks and the regression equation-solving baseline.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::geometry::{geometric_error, Halfspace, UnitVector};
use crate::oracle::{ledger_cost, Dollars, Oracle};

pub mod average;
pub mod lowd_meek;
pub mod qs;
pub mod regression;

pub use average::{average_attack, average_sample_size};
pub use lowd_meek::lowd_meek_extract;
pub use qs::{
    angular_bisect, majority_vote_query, noisy_qs_extract, qs_extract_halfspace, repetition_count,
    BisectionPlan, QsTrace, StopRule,
};
pub use regression::equation_solve_regression;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Fail,
    BudgetExceeded,
}

/// Result of one attack run against one oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub w_hat: Option<UnitVector>,
    /// Recovered coefficients for the regression baseline.
    pub coefficients: Option<Vec<f64>>,
    pub queries_used: u64,
    pub cost: Dollars,
    pub err2: Option<f64>,
    /// Agreement with the server on held-out data, for non-linear targets.
    pub accuracy: Option<f64>,
    /// `||v||` of the averaging attack.
    pub v_norm: Option<f64>,
    pub outcome: Outcome,
    pub wall_time: f64,
}

impl ExtractionReport {
    /// Fills `err2` against a known ground-truth halfspace.
    pub fn score_against(&mut self, truth: &Halfspace) {
        if let Some(w) = &self.w_hat {
            self.err2 = geometric_error(&truth.w, w).ok();
        }
    }

    pub fn scored(mut self, truth: &Halfspace) -> Self {
        self.score_against(truth);
        self
    }
}

/// Captures the ledger position and clock at the start of an attack.
pub(crate) struct RunMeter {
    start_count: u64,
    started: Instant,
}

impl RunMeter {
    pub(crate) fn start(o: &Oracle) -> Self {
        RunMeter { start_count: o.ledger().count(), started: Instant::now() }
    }

    pub(crate) fn queries(&self, o: &Oracle) -> u64 {
        o.ledger().count() - self.start_count
    }

    pub(crate) fn finish(&self, o: &Oracle, outcome: Outcome) -> ExtractionReport {
        let queries_used = self.queries(o);
        ExtractionReport {
            w_hat: None,
            coefficients: None,
            queries_used,
            cost: ledger_cost(queries_used, o.ledger().price_per_query()),
            err2: None,
            accuracy: None,
            v_norm: None,
            outcome,
            wall_time: self.started.elapsed().as_secs_f64(),
        }
    }
}
