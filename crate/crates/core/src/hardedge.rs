//! The Meijer-G hard-edge limit kernel and the large-n predictions for the
//! scaled biorthogonal polynomials near the origin.

use crate::equilibrium::{EquilibriumError, EquilibriumMeasure};
use crate::quad::gauss_jacobi_unit;
use crate::specialfn::{
    meijer_g, psi_k, EvalStrategy, MeijerFamily, MeijerGPattern, SpecialFnError,
};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardEdgeError {
    #[error("{0}")]
    NonConvergence(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
}

type Result<T> = std::result::Result<T, HardEdgeError>;

pub const DEFAULT_NODES: usize = 48;

/// ψ₀(w) = w^{−(α+1−θ)} G^{θ,0}(w^θ), entire in w.
fn psi0(theta: u32, alpha: f64, w: f64) -> Result<f64> {
    Ok(psi_k(
        theta,
        alpha,
        0,
        Complex64::new(w, 0.0),
        &EvalStrategy::default(),
    )?
    .re)
}

/// G^{1,0}_{0,θ+1}(0, −α/θ, (1−α)/θ, …, (θ−1−α)/θ | ζ).
fn g_dual(theta: u32, alpha: f64, zeta: f64) -> Result<f64> {
    let pattern = MeijerGPattern::new(MeijerFamily::OneZero, theta, alpha, 0)?;
    Ok(meijer_g(
        &pattern,
        Complex64::new(zeta, 0.0),
        &EvalStrategy::default(),
    )?
    .re)
}

fn check_args(alpha: f64, theta: u32) -> Result<()> {
    if theta == 0 {
        return Err(HardEdgeError::Domain(
            "theta must be a positive integer".into(),
        ));
    }
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(HardEdgeError::Domain(format!(
            "alpha = {alpha} must exceed -1"
        )));
    }
    Ok(())
}

fn kernel_with_nodes(alpha: f64, theta: u32, x: f64, y: f64, nodes: usize) -> Result<f64> {
    let (u, w) = gauss_jacobi_unit(nodes, alpha);
    let th = theta as i32;
    let mut sum = 0.0;
    for (u, w) in u.iter().zip(&w) {
        sum += w * psi0(theta, alpha, u * x)? * g_dual(theta, alpha, (u * y).powi(th))?;
    }
    Ok((theta * theta) as f64 * x.powf(alpha) * sum)
}

/// K^{(α,θ)}(x, y) = θ² x^{θ−1} ∫₀¹ u^{θ−1} G^{θ,0}((ux)^θ) G^{1,0}((uy)^θ) du.
///
/// Pulling (ux)^{α+1−θ} out of the first factor leaves u^α times a smooth
/// function, so the integral is done by Gauss–Jacobi with weight u^α. The
/// rule is run at `nodes` and at 1.5·`nodes` points and must agree.
pub fn limit_kernel(alpha: f64, theta: u32, x: f64, y: f64, nodes: usize) -> Result<f64> {
    check_args(alpha, theta)?;
    if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
        return Err(HardEdgeError::Domain(format!(
            "limit kernel needs x, y > 0, got ({x}, {y})"
        )));
    }
    let nodes = nodes.max(4);
    let a = kernel_with_nodes(alpha, theta, x, y, nodes)?;
    let b = kernel_with_nodes(alpha, theta, x, y, nodes + nodes / 2)?;
    if (a - b).abs() > 1e-10 * a.abs().max(1e-3) {
        return Err(HardEdgeError::NonConvergence(format!(
            "limit kernel at ({x}, {y}): {a} with {nodes} nodes against {b}"
        )));
    }
    Ok(b)
}

/// k^{(α,θ)}(x, y) = x^{θ−α−1} G^{θ,0}(x^θ) G^{1,0}(y^θ). The first factor is
/// ψ₀(x), so x = 0 gives the leading Puiseux coefficient.
pub fn factor_kernel(alpha: f64, theta: u32, x: f64, y: f64) -> Result<f64> {
    check_args(alpha, theta)?;
    if !(x >= 0.0 && y >= 0.0) || !x.is_finite() || !y.is_finite() {
        return Err(HardEdgeError::Domain(format!(
            "factor kernel needs x, y >= 0, got ({x}, {y})"
        )));
    }
    Ok(psi0(theta, alpha, x)? * g_dual(theta, alpha, y.powi(theta as i32))?)
}

/// Constants of the hard-edge asymptotics of p_n and q_n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HardEdgePredictions {
    pub alpha: f64,
    pub theta: u32,
    pub rho: f64,
    pub c: f64,
    pub ell: f64,
    pub g0_re: f64,
    pub gtilde0_re: f64,
}

impl HardEdgePredictions {
    pub fn from_measure(measure: &EquilibriumMeasure, alpha: f64) -> Result<Self> {
        let theta = measure.theta;
        if theta.fract() != 0.0 || theta < 1.0 {
            return Err(HardEdgeError::Domain(format!(
                "theta = {theta} is not a positive integer"
            )));
        }
        check_args(alpha, theta as u32)?;
        let g = measure.g_functions();
        Ok(Self {
            alpha,
            theta: theta as u32,
            rho: measure.rho,
            c: measure.c,
            ell: measure.ell,
            g0_re: g.re_g_at_zero()?,
            gtilde0_re: g.re_g_tilde_at_zero()?,
        })
    }

    /// ln C_n, C_n = (2π)^{1−θ/2} √θ c^{(2(α+1)−θ)/(2(1+θ))} (ρn)^{(α+1)/θ−1/2} e^{n Re g(0)}.
    pub fn ln_c_n(&self, n: usize) -> f64 {
        let (a, t, n) = (self.alpha, self.theta as f64, n as f64);
        (1.0 - t / 2.0) * (2.0 * PI).ln()
            + 0.5 * t.ln()
            + (2.0 * (a + 1.0) - t) / (2.0 * (1.0 + t)) * self.c.ln()
            + ((a + 1.0) / t - 0.5) * (self.rho * n).ln()
            + n * self.g0_re
    }

    /// ln C̃_n, C̃_n = (2π)^{θ/2} c^{(α+1/2)θ/(θ+1)} (ρn)^{1/2+α} e^{n Re g̃(0)}.
    pub fn ln_c_tilde_n(&self, n: usize) -> f64 {
        let (a, t, n) = (self.alpha, self.theta as f64, n as f64);
        t / 2.0 * (2.0 * PI).ln()
            + (a + 0.5) * t / (t + 1.0) * self.c.ln()
            + (0.5 + a) * (self.rho * n).ln()
            + n * self.gtilde0_re
    }

    pub fn c_n(&self, n: usize) -> f64 {
        self.ln_c_n(n).exp()
    }

    pub fn c_tilde_n(&self, n: usize) -> f64 {
        self.ln_c_tilde_n(n).exp()
    }

    /// Scale (ρn)^{1+1/θ} of the hard-edge variable.
    pub fn scale(&self, n: usize) -> f64 {
        (self.rho * n as f64).powf(1.0 + 1.0 / self.theta as f64)
    }

    /// (−1)^n C_n z^{θ−α−1} G^{θ,0}(z^θ), the main term for p_n(z/(ρn)^{1+1/θ}).
    pub fn predict_pn(&self, n: usize, z: Complex64) -> Result<Complex64> {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let psi = psi_k(self.theta, self.alpha, 0, z, &EvalStrategy::default())?;
        Ok(sign * self.c_n(n) * psi)
    }

    /// (−1)^n C̃_n G^{1,0}(z^θ), the main term for q_n(z^θ/(ρn)^{θ+1}).
    pub fn predict_qn(&self, n: usize, z: Complex64) -> Result<Complex64> {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let pattern = MeijerGPattern::new(MeijerFamily::OneZero, self.theta, self.alpha, 0)?;
        let g = meijer_g(
            &pattern,
            z.powi(self.theta as i32),
            &EvalStrategy::default(),
        )?;
        Ok(sign * self.c_tilde_n(n) * g)
    }
}
