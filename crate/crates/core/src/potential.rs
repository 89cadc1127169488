//! Polynomial external fields V(x) = Σ_{m≥1} v_m x^m.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("cannot parse potential {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("invalid potential: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    /// coefficients[m−1] = v_m.
    #[serde(rename = "coeffs")]
    pub coefficients: Vec<f64>,
    #[serde(default = "default_validity_grid")]
    pub validity_grid: Vec<f64>,
}

fn default_validity_grid() -> Vec<f64> {
    (1..=64).map(|i| i as f64 / 8.0).collect()
}

impl PotentialSpec {
    /// Checks positivity of the leading coefficient and the convexity
    /// condition x V''(x) + V'(x) > 0 on the validity grid.
    pub fn new(coefficients: Vec<f64>) -> Result<Self, PotentialError> {
        let spec = Self {
            coefficients,
            validity_grid: default_validity_grid(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn linear() -> Self {
        Self {
            coefficients: vec![1.0],
            validity_grid: default_validity_grid(),
        }
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        let mut c = self.coefficients.clone();
        while c.last() == Some(&0.0) {
            c.pop();
        }
        let Some(&lead) = c.last() else {
            return Err(PotentialError::Invalid("no nonzero coefficient".into()));
        };
        if c.iter().any(|v| !v.is_finite()) {
            return Err(PotentialError::Invalid("non-finite coefficient".into()));
        }
        if lead <= 0.0 {
            return Err(PotentialError::Invalid(format!(
                "leading coefficient {lead} must be positive"
            )));
        }
        for &x in &self.validity_grid {
            if x > 0.0 && !(x * self.d2v(x) + self.dv(x) > 0.0) {
                return Err(PotentialError::Invalid(format!(
                    "x V''(x) + V'(x) is not positive at x = {x}"
                )));
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len()
    }

    pub fn v(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| (acc + c) * x)
    }

    pub fn dv(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (i, &c)| acc * x + (i + 1) as f64 * c)
    }

    pub fn d2v(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, &c)| acc * x + ((i + 1) * i) as f64 * c)
    }

    pub fn v_c(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| (acc + c) * z)
    }

    pub fn dv_c(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .enumerate()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (i, &c)| {
                acc * z + (i + 1) as f64 * c
            })
    }

    /// Parses strings like `x`, `x^2`, `x + x^2/2`, `0.5*x^3 - 0.1x`.
    pub fn parse(input: &str) -> Result<Self, PotentialError> {
        let coeffs = parse_polynomial(input).map_err(|reason| PotentialError::Parse {
            input: input.to_string(),
            reason,
        })?;
        let spec = Self {
            coefficients: coeffs,
            validity_grid: default_validity_grid(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Human-readable form, e.g. `x + 0.5x^2`.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        for (i, &c) in self.coefficients.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mono = if i == 0 {
                "x".to_string()
            } else {
                format!("x^{}", i + 1)
            };
            parts.push(if c == 1.0 { mono } else { format!("{c}{mono}") });
        }
        parts.join(" + ")
    }
}

const MAX_DEGREE: usize = 64;

fn parse_polynomial(input: &str) -> Result<Vec<f64>, String> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty".into());
    }
    let bytes = s.as_bytes();
    let mut coeffs: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let mut sign = 1.0;
        if bytes[i] == b'+' || bytes[i] == b'-' {
            if bytes[i] == b'-' {
                sign = -1.0;
            }
            i += 1;
        } else if i > 0 {
            return Err(format!("expected '+' or '-' at offset {i}"));
        }
        let start = i;
        while i < bytes.len()
            && (bytes[i].is_ascii_digit() || bytes[i] == b'.' || bytes[i] == b'e' && i > start)
        {
            // allow exponents like 1e-3
            if bytes[i] == b'e'
                && i + 1 < bytes.len()
                && (bytes[i + 1] == b'-' || bytes[i + 1] == b'+')
            {
                i += 1;
            }
            i += 1;
        }
        let mut coef = if i > start {
            s[start..i]
                .parse::<f64>()
                .map_err(|e| format!("bad number {:?}: {e}", &s[start..i]))?
        } else {
            1.0
        };
        if i < bytes.len() && bytes[i] == b'*' {
            i += 1;
        }
        if i >= bytes.len() || bytes[i] != b'x' {
            return Err(format!(
                "expected 'x' at offset {i} (constant terms are not allowed)"
            ));
        }
        i += 1;
        let mut power = 1usize;
        if i < bytes.len() && bytes[i] == b'^' {
            i += 1;
            let ps = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            power = s[ps..i]
                .parse::<usize>()
                .map_err(|_| format!("bad exponent at offset {ps}"))?;
        }
        if power == 0 || power > MAX_DEGREE {
            return Err(format!("exponent {power} outside 1..={MAX_DEGREE}"));
        }
        if i < bytes.len() && bytes[i] == b'/' {
            i += 1;
            let ds = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let d = s[ds..i]
                .parse::<f64>()
                .map_err(|_| format!("bad divisor at offset {ds}"))?;
            if d == 0.0 {
                return Err("division by zero".into());
            }
            coef /= d;
        }
        if !coef.is_finite() {
            return Err("non-finite coefficient".into());
        }
        if coeffs.len() < power {
            coeffs.resize(power, 0.0);
        }
        coeffs[power - 1] += sign * coef;
    }
    Ok(coeffs)
}
