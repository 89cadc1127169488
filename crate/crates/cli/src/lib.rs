//! Named experiments over the `mbhe` library with machine-readable output.
//!
//! Every command returns an [`Outcome`]: the artifact text (CSV or JSON)
//! and the list of assertions that were evaluated. The binary exits with a
//! nonzero status iff one of them fails.

pub mod config;
mod experiments;

pub use config::{
    parse_grid, parse_ns, parse_potential, Command, ConfigError, ConfigFile, Format, Grid,
    RunConfig,
};
pub use experiments::run;

use serde::Serialize;
use serde_json::Value;
use std::fmt;

/// A module error tagged with where it happened.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunError {
    pub module: &'static str,
    pub operation: &'static str,
    pub message: String,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}: {}", self.module, self.operation, self.message)
    }
}

impl std::error::Error for RunError {}

/// `result.map_err(at("biorthogonal", "build_system"))`.
pub fn at<E: fmt::Display>(
    module: &'static str,
    operation: &'static str,
) -> impl Fn(E) -> RunError {
    move |e| RunError {
        module,
        operation,
        message: e.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable pass condition, e.g. `< 1e-8`.
    pub condition: String,
    pub pass: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            condition: format!("< {limit:e}"),
            pass: value < limit,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            condition: format!("{target:e} ± {tol:e}"),
            pass: (value - target).abs() <= tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub artifact: String,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// 15 significant digits, as used for every number in CSV output.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.14e}")
    } else {
        format!("{x}")
    }
}

/// Rounds to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.14e}").parse().unwrap_or(x)
    } else {
        x
    }
}

/// Rounds every floating-point number in a JSON tree to 15 significant
/// digits so that the printed form does not depend on the last bits.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .and_then(|x| serde_json::Number::from_f64(round15(x)))
            {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(m) => m.values_mut().for_each(round_json),
        _ => {}
    }
}

pub fn to_json_text(mut v: Value) -> String {
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// CSV with a header row; numbers formatted by [`fmt_num`].
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}
