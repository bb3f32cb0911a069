//! One experiment per value of a swept parameter, written as CSV rows.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::{SweepAxis, SweepSpec};
use crate::runner::{run_experiment_with, Aggregates, RunOptions};
use crate::HarnessError;

pub const CSV_COLUMNS: &str =
    "axis,value,trials,mean_queries,std_queries,mean_err2,success_rate,mean_cost,total_cost,error";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub result: Result<Aggregates, String>,
}

/// Rows in the order of `spec.values`. A failing cell is recorded in its row.
pub fn run_sweep(spec: &SweepSpec, opts: RunOptions) -> Result<Vec<SweepRow>, HarnessError> {
    spec.validate()?;
    let opts = RunOptions { capture_first_trial: false, ..opts };
    Ok(spec
        .values
        .iter()
        .map(|&value| {
            let result = spec
                .cell(value)
                .and_then(|cfg| run_experiment_with(&cfg, opts))
                .map(|(r, _)| r.aggregates)
                .map_err(|e| e.to_string());
            SweepRow { value, result }
        })
        .collect())
}

fn axis_name(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::Eps => "eps",
        SweepAxis::D => "d",
        SweepAxis::Rho => "rho",
        SweepAxis::Sigma => "sigma",
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Comment line naming the columns, the header, then one row per value.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], axis: SweepAxis, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# columns: {CSV_COLUMNS}")?;
    writeln!(out, "{CSV_COLUMNS}")?;
    let name = axis_name(axis);
    for row in rows {
        match &row.result {
            Ok(a) => writeln!(
                out,
                "{name},{},{},{},{},{},{},{},{},",
                row.value,
                a.trials,
                a.mean_queries,
                a.std_queries,
                opt(a.mean_err2),
                a.success_rate,
                a.mean_cost,
                a.total_cost,
            )?,
            Err(e) => {
                let msg = e.replace(['"', '\n'], "'");
                writeln!(out, "{name},{},,,,,,,,\"{msg}\"", row.value)?
            }
        }
    }
    Ok(())
}
