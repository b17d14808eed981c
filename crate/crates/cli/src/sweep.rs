//! Batch sweeps over one parameter, driven by a JSON file such as
//!
//! ```json
//! {"command": "fraction", "variable": "q",
//!  "range": {"start": 0.55, "stop": 0.95, "step": 0.05},
//!  "fixed": {"p": 0.5}}
//! ```
//!
//! `range` may also be written `[start, stop, step]`.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::commands::{self, CliError, CliResult, Params};
use crate::output::{round_sig, Record};

const VARIABLES: [&str; 7] = ["q", "p", "f", "alpha", "eps", "Q", "N"];
const MAX_ROWS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Range {
    Named { start: f64, stop: f64, step: f64 },
    Triple(f64, f64, f64),
}

impl Range {
    fn parts(self) -> (f64, f64, f64) {
        match self {
            Range::Named { start, stop, step } | Range::Triple(start, stop, step) => (start, stop, step),
        }
    }

    /// Grid points from start to stop inclusive, cleaned of accumulated
    /// floating-point noise.
    pub fn points(self) -> CliResult<Vec<f64>> {
        let (start, stop, step) = self.parts();
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || start > stop {
            return Err(CliError::input("range needs finite start <= stop and step > 0"));
        }
        let count = ((stop - start) / step + 1e-9).floor() + 1.0;
        if count > MAX_ROWS as f64 {
            return Err(CliError::input(format!("range has more than {MAX_ROWS} points")));
        }
        Ok((0..count as u64).map(|i| round_sig(start + i as f64 * step, 12)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Fraction,
    Growth,
    Bounds,
    Kq,
    SensitivityBias,
    SensitivityFraction,
    GapNo,
    GapYes,
    Simulate,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub command: Target,
    pub variable: String,
    pub range: Range,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
}

impl SweepSpec {
    pub fn parse(text: &str) -> CliResult<Self> {
        let spec: SweepSpec = serde_json::from_str(text).map_err(|e| CliError::input(format!("sweep file: {e}")))?;
        if !VARIABLES.contains(&spec.variable.as_str()) {
            return Err(CliError::input(format!("unknown sweep variable {}", spec.variable)));
        }
        if spec.fixed.contains_key(&spec.variable) {
            return Err(CliError::input(format!("{} is both swept and fixed", spec.variable)));
        }
        Ok(spec)
    }
}

/// Evaluate every grid point. Any failing point fails the whole sweep so no
/// partial table is emitted.
pub fn run(spec: &SweepSpec, seed: Option<u64>, threads: Option<usize>) -> CliResult<Vec<Record>> {
    let seed = match (spec.command, seed) {
        (Target::Simulate, None) => return Err(CliError::input("simulate sweeps require --seed")),
        (_, s) => s.unwrap_or(0),
    };
    let mut base = Params::new();
    for (k, v) in &spec.fixed {
        base.set(k, *v);
    }
    spec.range
        .points()?
        .into_iter()
        .map(|x| {
            let mut params = base.clone();
            params.set(&spec.variable, x);
            let record = match spec.command {
                Target::Fraction => commands::fraction(&params),
                Target::Growth => commands::growth_rate(&params),
                Target::Bounds => commands::bounds(&params),
                Target::Kq => commands::kq(&params),
                Target::SensitivityBias => commands::sensitivity_bias(&params),
                Target::SensitivityFraction => commands::sensitivity_fraction(&params),
                Target::GapNo => commands::gap_confident_no(&params),
                Target::GapYes => commands::gap_confident_yes(&params),
                Target::Simulate => commands::simulate(&params, seed, threads),
            };
            record.map_err(|e| CliError { code: e.code, message: format!("{} = {x}: {}", spec.variable, e.message) })
        })
        .collect()
}
