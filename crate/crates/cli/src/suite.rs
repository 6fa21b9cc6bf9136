//! Scaling suites: one diagnostics row per value of a single axis.

use std::fmt::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::ExpError;
use crate::pipeline::Pipeline;
use crate::run::fmt_float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Primes,
    Modes,
    Seed,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Primes => "N_P",
            Axis::Modes => "N_H",
            Axis::Seed => "seed",
        }
    }

    pub fn apply(&self, base: &ExperimentConfig, value: u64) -> Result<ExperimentConfig, ExpError> {
        let mut cfg = base.clone();
        let count = || {
            usize::try_from(value)
                .map_err(|_| ExpError::Other(format!("{} value {value} too large", self.name())))
        };
        match self {
            Axis::Primes => cfg.n_primes = count()?,
            Axis::Modes => cfg.n_modes = count()?,
            Axis::Seed => cfg.seed = value,
        }
        Ok(cfg)
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "N_P" | "n_p" | "primes" => Ok(Axis::Primes),
            "N_H" | "n_h" | "modes" => Ok(Axis::Modes),
            "seed" => Ok(Axis::Seed),
            other => Err(format!(
                "unknown axis `{other}` (expected N_P, N_H or seed)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteRow {
    pub axis_value: u64,
    pub mae: f64,
    pub max_abs: f64,
    pub e_step: f64,
}

fn suite_row(axis: Axis, value: u64, base: &ExperimentConfig) -> Result<SuiteRow, ExpError> {
    let cfg = axis.apply(base, value)?;
    let pipeline = Pipeline::run(&cfg)?;
    let alignment = pipeline.alignment.ok_or_else(|| {
        ExpError::Other(format!(
            "only {} gap levels, K = {} required",
            pipeline.spectrum.len(),
            cfg.fit_count
        ))
    })?;
    let r = alignment.report;
    Ok(SuiteRow {
        axis_value: value,
        mae: r.mae,
        max_abs: r.max_abs,
        e_step: r.e_step,
    })
}

/// Runs are independent and computed in parallel; rows come back in input
/// order. The first failing value (in input order) aborts the suite.
pub fn scaling_suite(
    axis: Axis,
    values: &[u64],
    base: &ExperimentConfig,
) -> Result<Vec<SuiteRow>, ExpError> {
    if values.is_empty() {
        return Err(ExpError::Other(
            "scaling suite needs at least one value".into(),
        ));
    }
    base.validate()?;
    values
        .par_iter()
        .map(|&v| {
            suite_row(axis, v, base).map_err(|e| ExpError::Suite {
                axis: axis.name(),
                value: v,
                source: Box::new(e),
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

pub fn suite_csv(rows: &[SuiteRow]) -> String {
    let mut s = String::from("axis_value,MAE,max_abs,E_step\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{}",
            r.axis_value,
            fmt_float(r.mae),
            fmt_float(r.max_abs),
            fmt_float(r.e_step)
        )
        .unwrap();
    }
    s
}
