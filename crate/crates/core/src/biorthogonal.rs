//! Finite-n biorthogonal polynomials for the weight w(x) = x^α e^{−nV(x)}
//! on [0, ∞), built in multiprecision from moment matrices.
//!
//! With G_{il} = ∫ x^i x^{θl} w dx = m_{i+θl} and the unpivoted factorisation
//! G = L D U (L unit lower, U unit upper), the rows of L⁻¹ are the monic p_j,
//! the columns of U⁻¹ the monic q_j, and D holds the norms κ_j.

use crate::potential::PotentialSpec;
use crate::quad::{gauss_kronrod_real, tanh_sinh, MpTanhSinh, TsPoint};
use crate::specialfn::mp::log2_abs_float;
use num_complex::Complex64;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Complex, Float};
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BiorthogonalError {
    #[error("invalid problem: {0}")]
    InvalidSpec(String),
    #[error("moment quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("moment matrix singular at pivot {index} with {precision_bits} bits")]
    SingularMoments { index: usize, precision_bits: u32 },
    #[error("domain error: {0}")]
    Domain(String),
}

type Result<T> = std::result::Result<T, BiorthogonalError>;

const MAX_RETRIES: u32 = 3;
const CAUCHY_TOL: f64 = 1e-12;

pub fn default_precision(n: usize) -> u32 {
    256.max(16 * n as u32)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProblemSpec {
    pub potential: PotentialSpec,
    pub theta: u32,
    pub alpha: f64,
    pub n: usize,
    pub precision_bits: u32,
}

impl ProblemSpec {
    pub fn new(potential: PotentialSpec, theta: u32, alpha: f64, n: usize) -> Result<Self> {
        let spec = Self {
            potential,
            theta,
            alpha,
            n,
            precision_bits: default_precision(n),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_precision(mut self, bits: u32) -> Result<Self> {
        self.precision_bits = bits;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta == 0 {
            return Err(BiorthogonalError::InvalidSpec(
                "theta must be a positive integer".into(),
            ));
        }
        if !(self.alpha > -1.0) || !self.alpha.is_finite() {
            return Err(BiorthogonalError::InvalidSpec(format!(
                "alpha = {} must exceed -1",
                self.alpha
            )));
        }
        if self.n == 0 {
            return Err(BiorthogonalError::InvalidSpec("n must be positive".into()));
        }
        if self.precision_bits < 128 {
            return Err(BiorthogonalError::InvalidSpec(format!(
                "precision {} below 128 bits",
                self.precision_bits
            )));
        }
        self.potential
            .validate()
            .map_err(|e| BiorthogonalError::InvalidSpec(e.to_string()))
    }

    fn is_linear(&self) -> bool {
        let c = &self.potential.coefficients;
        !c.is_empty() && c[0] == 1.0 && c[1..].iter().all(|&v| v == 0.0)
    }

    /// Largest moment power needed to build p_n and q_n.
    pub fn max_power(&self) -> usize {
        self.n + self.theta as usize * self.n
    }

    /// Point beyond which x^{a+α} e^{−nV(x)} has dropped `bits` binary
    /// orders below its peak, for every a ≤ `a_max`.
    pub fn cutoff(&self, a_max: usize, bits: u32) -> f64 {
        let n = self.n as f64;
        let v = &self.potential;
        let drop = bits as f64 * std::f64::consts::LN_2 + 40.0;
        let log_f = |a: f64, x: f64| (a + self.alpha) * x.ln() - n * v.v(x);
        let peak = |a: f64| {
            // n x V'(x) = a + α has a single root since xV' is increasing
            let target = (a + self.alpha).max(0.0);
            let (mut lo, mut hi) = (0.0, 1.0);
            while n * hi * v.dv(hi) < target {
                hi *= 2.0;
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if n * mid * v.dv(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let mut x_max: f64 = 1.0;
        for a in [0.0, a_max as f64] {
            let p = peak(a).max(1e-6);
            let top = log_f(a, p);
            let mut x = (2.0 * p).max(1.0);
            while !(log_f(a, x) < top - drop) {
                x *= 1.25;
            }
            x_max = x_max.max(x);
        }
        x_max
    }

    pub fn weight(&self, x: f64) -> f64 {
        x.powf(self.alpha) * (-(self.n as f64) * self.potential.v(x)).exp()
    }

    fn weight_c(&self, z: Complex64) -> Complex64 {
        z.powf(self.alpha) * (-(self.n as f64) * self.potential.v_c(z)).exp()
    }
}

/// m_a = ∫₀^∞ x^{a+α} e^{−nV(x)} dx for a = 0..=max_power.
pub fn compute_moments(spec: &ProblemSpec, max_power: usize) -> Result<Vec<Float>> {
    spec.validate()?;
    let prec = spec.precision_bits;
    if spec.is_linear() {
        let n = Float::with_val(prec, spec.n as u32);
        let ln_n = Float::with_val(prec, n.ln_ref());
        return Ok((0..=max_power)
            .map(|a| {
                let s = Float::with_val(prec, spec.alpha) + (a as u32 + 1);
                let g = Float::with_val(prec, s.gamma_ref());
                g / Float::with_val(prec, Float::with_val(prec, &s * &ln_n).exp())
            })
            .collect());
    }
    let x_max = spec.cutoff(max_power, prec);
    let target = prec as f64 / 2.0 + 16.0;
    let mut previous: Option<Vec<Float>> = None;
    for level in 5..=14 {
        let u_max = x_max.powf(spec.alpha + 1.0);
        let current = moments_on_nodes(spec, &MpTanhSinh::new(u_max, level, prec + 32), max_power);
        if let Some(prev) = &previous {
            let worst = current
                .iter()
                .zip(prev)
                .map(|(a, b)| {
                    let d = Float::with_val(prec, a - b);
                    match (log2_abs_float(&d), log2_abs_float(a)) {
                        (None, _) => f64::NEG_INFINITY,
                        (Some(dl), Some(al)) => dl - al,
                        (Some(_), None) => f64::INFINITY,
                    }
                })
                .fold(f64::NEG_INFINITY, f64::max);
            if worst < -target {
                return Ok(current
                    .into_iter()
                    .map(|m| Float::with_val(prec, m))
                    .collect());
            }
        }
        previous = Some(current);
    }
    Err(BiorthogonalError::QuadratureFailure(format!(
        "moments up to power {max_power} did not settle"
    )))
}

// In u = x^{α+1} the factor x^α dx becomes du/(α+1), so the integrand is
// bounded at 0 whatever α is.
fn moments_on_nodes(spec: &ProblemSpec, rule: &MpTanhSinh, max_power: usize) -> Vec<Float> {
    let prec = rule.nodes.first().map(|x| x.prec()).unwrap_or(128);
    let coeffs: Vec<Float> = spec
        .potential
        .coefficients
        .iter()
        .map(|&c| Float::with_val(prec, c))
        .collect();
    let inv = Float::with_val(prec, Float::with_val(prec, spec.alpha) + 1u32).recip();
    let n = spec.n as u32;
    rule.nodes
        .par_iter()
        .zip(&rule.weights)
        .map(|(u, w)| {
            let x = Float::with_val(prec, Float::with_val(prec, u.ln_ref()) * &inv).exp();
            let mut v = Float::with_val(prec, 0);
            for c in coeffs.iter().rev() {
                v += c;
                v *= &x;
            }
            v *= n;
            let mut term = Float::with_val(prec, (-v).exp_ref());
            term *= w;
            term *= &inv;
            let mut out = Vec::with_capacity(max_power + 1);
            for _ in 0..=max_power {
                out.push(term.clone());
                term *= &x;
            }
            out
        })
        .reduce(
            || vec![Float::with_val(prec, 0); max_power + 1],
            |mut acc, v| {
                for (a, b) in acc.iter_mut().zip(v) {
                    *a += b;
                }
                acc
            },
        )
}

#[derive(Clone, Debug)]
pub struct BiorthogonalSystem {
    pub spec: ProblemSpec,
    /// p_coeffs[j][i] is the coefficient of x^i in p_j, j = 0..=n.
    pub p_coeffs: Vec<Vec<Float>>,
    /// q_coeffs[j][l] is the coefficient of y^l in q_j, j = 0..=n.
    pub q_coeffs: Vec<Vec<Float>>,
    pub kappas: Vec<Float>,
    /// Precision actually used after any retries.
    pub precision_bits: u32,
    moments: Vec<Float>,
}

/// Builds p_j, q_j, κ_j for j = 0..=n, doubling the precision when a pivot
/// falls below the precision floor.
pub fn build_system(spec: &ProblemSpec) -> Result<BiorthogonalSystem> {
    spec.validate()?;
    let mut attempt = spec.clone();
    let mut last = None;
    for _ in 0..=MAX_RETRIES {
        match build_at(&attempt) {
            Err(e @ BiorthogonalError::SingularMoments { .. }) => {
                last = Some(e);
                attempt.precision_bits *= 2;
            }
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

fn build_at(spec: &ProblemSpec) -> Result<BiorthogonalSystem> {
    let prec = spec.precision_bits;
    let size = spec.n + 1;
    let theta = spec.theta as usize;
    let moments = compute_moments(spec, spec.max_power())?;
    // closed-form moments are good to full precision, quadrature ones to half
    let trusted_bits = if spec.is_linear() {
        prec as f64
    } else {
        prec as f64 / 2.0
    };
    let gram = |i: usize, l: usize| &moments[i + theta * l];

    // Doolittle-style L D U without pivoting
    let zero = Float::with_val(prec, 0);
    let mut lower = vec![vec![zero.clone(); size]; size];
    let mut upper = vec![vec![zero.clone(); size]; size];
    let mut d = vec![zero.clone(); size];
    for k in 0..size {
        // upper row k (unscaled): G_{k,l} − Σ_{s<k} L_{k,s} D_s U_{s,l}
        let mut row = Vec::with_capacity(size - k);
        for l in k..size {
            let mut acc = gram(k, l).clone();
            for s in 0..k {
                acc -= Float::with_val(prec, &lower[k][s] * &d[s]) * &upper[s][l];
            }
            row.push(acc);
        }
        let pivot = row[0].clone();
        let lost = match (log2_abs_float(gram(k, k)), log2_abs_float(&pivot)) {
            (Some(g), Some(p)) => g - p,
            _ => f64::INFINITY,
        };
        if !(pivot > 0) || lost > trusted_bits - 32.0 {
            return Err(BiorthogonalError::SingularMoments {
                index: k,
                precision_bits: prec,
            });
        }
        for (l, v) in (k..size).zip(row) {
            upper[k][l] = v / &pivot;
        }
        lower[k][k] = Float::with_val(prec, 1);
        for i in k + 1..size {
            let mut acc = gram(i, k).clone();
            for s in 0..k {
                acc -= Float::with_val(prec, &lower[i][s] * &d[s]) * &upper[s][k];
            }
            lower[i][k] = acc / &pivot;
        }
        d[k] = pivot;
    }

    // p_j: row j of L⁻¹; q_j: column j of U⁻¹.
    let mut p_coeffs = vec![Vec::new(); size];
    for j in 0..size {
        let mut row = vec![zero.clone(); j + 1];
        row[j] = Float::with_val(prec, 1);
        for i in (0..j).rev() {
            let mut acc = Float::with_val(prec, 0);
            for s in i + 1..=j {
                acc -= Float::with_val(prec, &row[s] * &lower[s][i]);
            }
            row[i] = acc;
        }
        p_coeffs[j] = row;
    }
    let mut q_coeffs = vec![Vec::new(); size];
    for j in 0..size {
        let mut col = vec![zero.clone(); j + 1];
        col[j] = Float::with_val(prec, 1);
        for l in (0..j).rev() {
            let mut acc = Float::with_val(prec, 0);
            for s in l + 1..=j {
                acc -= Float::with_val(prec, &upper[l][s] * &col[s]);
            }
            col[l] = acc;
        }
        q_coeffs[j] = col;
    }
    Ok(BiorthogonalSystem {
        spec: spec.clone(),
        p_coeffs,
        q_coeffs,
        kappas: d,
        precision_bits: prec,
        moments,
    })
}

fn horner(coeffs: &[Float], x: &Float) -> Float {
    let mut acc = Float::with_val(x.prec(), 0);
    for c in coeffs.iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

fn horner_c(coeffs: &[Float], z: &Complex) -> Complex {
    let mut acc = Complex::with_val(z.prec(), 0);
    for c in coeffs.iter().rev() {
        acc *= z;
        acc += c;
    }
    acc
}

/// Residuals of the Riemann–Hilbert problems for (p_n, Cp_n) and
/// (q_n, C̃q_n), relative to the size of the quantities involved.
#[derive(Clone, Debug, Serialize)]
pub struct RhReport {
    pub jump_residual: f64,
    pub jump_residual_tilde: f64,
    pub symmetry_residual: f64,
    /// (R, |z^{(n+1)θ} Cp_n(z)|, |z^{n+1} C̃q_n(z)|) along z = R e^{iπ/(2θ)}.
    pub decay: Vec<(f64, f64, f64)>,
}

impl RhReport {
    pub fn max_residual(&self) -> f64 {
        self.jump_residual
            .max(self.jump_residual_tilde)
            .max(self.symmetry_residual)
    }
}

impl BiorthogonalSystem {
    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn kappa(&self, j: usize) -> f64 {
        self.kappas[j].to_f64()
    }

    pub fn moments(&self) -> &[Float] {
        &self.moments
    }

    fn mp(&self, x: f64) -> Float {
        Float::with_val(self.precision_bits, x)
    }

    pub fn eval_p(&self, j: usize, x: f64) -> f64 {
        horner(&self.p_coeffs[j], &self.mp(x)).to_f64()
    }

    /// q_j at y (a value of x^θ).
    pub fn eval_q(&self, j: usize, y: f64) -> f64 {
        horner(&self.q_coeffs[j], &self.mp(y)).to_f64()
    }

    pub fn eval_p_complex(&self, j: usize, z: Complex64) -> Complex64 {
        let v = horner_c(
            &self.p_coeffs[j],
            &Complex::with_val(self.precision_bits, (z.re, z.im)),
        );
        Complex64::new(v.real().to_f64(), v.imag().to_f64())
    }

    pub fn eval_q_complex(&self, j: usize, y: Complex64) -> Complex64 {
        let v = horner_c(
            &self.q_coeffs[j],
            &Complex::with_val(self.precision_bits, (y.re, y.im)),
        );
        Complex64::new(v.real().to_f64(), v.imag().to_f64())
    }

    /// K_n(x, y) = x^α e^{−nV(x)} Σ_{j<n} p_j(x) q_j(y^θ)/κ_j.
    pub fn eval_kernel_kn(&self, x: f64, y: f64) -> Result<f64> {
        if !(x > 0.0 && y > 0.0) {
            return Err(BiorthogonalError::Domain(format!(
                "kernel needs x, y > 0, got ({x}, {y})"
            )));
        }
        let prec = self.precision_bits;
        let xm = self.mp(x);
        let ym = Float::with_val(prec, self.mp(y).pow(self.spec.theta));
        let mut sum = Float::with_val(prec, 0);
        for j in 0..self.spec.n {
            let t = Float::with_val(
                prec,
                horner(&self.p_coeffs[j], &xm) * horner(&self.q_coeffs[j], &ym),
            );
            sum += t / &self.kappas[j];
        }
        let n = self.spec.n as f64;
        let ln_w = self.spec.alpha * x.ln() - n * self.spec.potential.v(x);
        Ok(sum.to_f64() * ln_w.exp())
    }

    /// (ρn)^{−(1+1/θ)} K_n(x/(ρn)^{1+1/θ}, y/(ρn)^{1+1/θ}).
    pub fn eval_kernel_scaled(&self, rho: f64, x: f64, y: f64) -> Result<f64> {
        let s = (rho * self.spec.n as f64).powf(1.0 + 1.0 / self.spec.theta as f64);
        Ok(self.eval_kernel_kn(x / s, y / s)? / s)
    }

    pub fn eval_kernel_grid(&self, points: &[(f64, f64)], rho: Option<f64>) -> Result<Vec<f64>> {
        points
            .par_iter()
            .map(|&(x, y)| match rho {
                Some(r) => self.eval_kernel_scaled(r, x, y),
                None => self.eval_kernel_kn(x, y),
            })
            .collect()
    }

    /// R_{jk} = ∫ p_j(x) q_k(x^θ) w dx from the moments, j, k ≤ n.
    pub fn residual_matrix(&self) -> Vec<Vec<Float>> {
        let prec = self.precision_bits;
        let theta = self.spec.theta as usize;
        let size = self.spec.n + 1;
        (0..size)
            .into_par_iter()
            .map(|j| {
                // row vector p_j^T G
                let pg: Vec<Float> = (0..size)
                    .map(|l| {
                        let mut acc = Float::with_val(prec, 0);
                        for (i, c) in self.p_coeffs[j].iter().enumerate() {
                            acc += Float::with_val(prec, c * &self.moments[i + theta * l]);
                        }
                        acc
                    })
                    .collect();
                (0..size)
                    .map(|k| {
                        let mut acc = Float::with_val(prec, 0);
                        for (l, c) in self.q_coeffs[k].iter().enumerate() {
                            acc += Float::with_val(prec, c * &pg[l]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    /// max_{j≠k} |R_{jk}| / max_j κ_j.
    pub fn max_offdiagonal_residual(&self) -> f64 {
        let r = self.residual_matrix();
        let kmax = self.kappas.iter().map(|k| k.to_f64()).fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for (j, row) in r.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if j != k {
                    worst = worst.max(v.to_f64().abs());
                }
            }
        }
        worst / kmax
    }

    /// Cp_n(z) = (1/2πi) ∫₀^∞ p_n(x) w(x)/(x^θ − z^θ) dx for z in the sector
    /// |arg z| ≤ π/θ off the positive axis.
    pub fn cauchy_p(&self, z: Complex64) -> Result<Complex64> {
        let theta = self.spec.theta;
        if z.arg().abs() > PI / theta as f64 + 1e-12 || (z.im == 0.0 && z.re >= 0.0) {
            return Err(BiorthogonalError::Domain(format!(
                "{z} is not in the sector off [0, ∞)"
            )));
        }
        let n = self.spec.n;
        self.cauchy(z, theta, &|t| self.eval_p(n, t), &|z| {
            self.eval_p_complex(n, z)
        })
    }

    /// C̃q_n(z) = (1/2πi) ∫₀^∞ q_n(x^θ) w(x)/(x − z) dx for z off [0, ∞).
    pub fn cauchy_q(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 && z.re >= 0.0 {
            return Err(BiorthogonalError::Domain(format!("{z} lies on [0, ∞)")));
        }
        let n = self.spec.n;
        let theta = self.spec.theta as i32;
        self.cauchy(z, 1, &|t| self.eval_q(n, t.powi(theta)), &|z| {
            self.eval_q_complex(n, z.powi(theta))
        })
    }

    pub fn cauchy_transforms(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        Ok((self.cauchy_p(z)?, self.cauchy_q(z)?))
    }

    /// (1/2πi) ∫₀^∞ f(t) w(t)/(t^m − z^m) dt. Two exact forms are tried: the
    /// plain one, and the one obtained by expanding 1/(t^m − ζ) n terms deep
    /// and using the n vanishing moments of f, which carries a factor ζ^{−n}
    /// and avoids the cancellation at large |z|. The form with the smaller
    /// rounding bound wins. Near the positive axis the pole is subtracted.
    fn cauchy(
        &self,
        z: Complex64,
        m: u32,
        f: &(dyn Fn(f64) -> f64 + Sync),
        f_c: &(dyn Fn(Complex64) -> Complex64 + Sync),
    ) -> Result<Complex64> {
        let n = self.spec.n as i32;
        let mi = m as i32;
        let zeta = z.powi(mi);
        let t_max = self.spec.cutoff(self.spec.max_power(), 64);
        let plain = self.cauchy_integral(z, m, 0, t_max, f, f_c)?;
        let reduced = self.cauchy_integral(z, m, n * mi, t_max, f, f_c)?;
        let scale = zeta.norm().powi(-n);
        let value = if plain.1 <= scale * reduced.1 {
            plain.0
        } else {
            reduced.0 * zeta.powi(-n)
        };
        Ok(value / Complex64::new(0.0, 2.0 * PI))
    }

    /// Returns (∫ F(t)/(t^m − ζ) dt, ∫ |F(t)/(t^m − ζ)| dt) with
    /// F = f w t^{extra}.
    fn cauchy_integral(
        &self,
        z: Complex64,
        m: u32,
        extra: i32,
        t_max: f64,
        f: &(dyn Fn(f64) -> f64 + Sync),
        f_c: &(dyn Fn(Complex64) -> Complex64 + Sync),
    ) -> Result<(Complex64, f64)> {
        let mi = m as i32;
        let zeta = z.powi(mi);
        let big_f = |t: f64| f(t) * self.spec.weight(t) * t.powi(extra);
        let near_axis = zeta.re > 0.0 && zeta.im.abs() < 0.5 * zeta.re && z.norm() < t_max;
        let fz = if near_axis {
            f_c(z) * self.spec.weight_c(z) * z.powi(extra)
        } else {
            Complex64::new(0.0, 0.0)
        };
        let zm1 = z.powi(mi - 1);
        let integrand = |p: TsPoint| -> Complex64 {
            let t = p.x;
            let denom = Complex64::new(t.powi(mi), 0.0) - zeta;
            let mut num = Complex64::new(big_f(t), 0.0);
            if near_axis {
                num -= fz * Complex64::new(t, 0.0).powi(mi - 1) / zm1;
            }
            num / denom
        };
        let split = z.norm().min(0.5 * t_max);
        let quad = |g: &(dyn Fn(TsPoint) -> Complex64 + Sync)| -> Result<Complex64> {
            let a = tanh_sinh(g, 0.0, split, CAUCHY_TOL)
                .map_err(|e| BiorthogonalError::QuadratureFailure(e.to_string()))?;
            let b = tanh_sinh(g, split, t_max, CAUCHY_TOL)
                .map_err(|e| BiorthogonalError::QuadratureFailure(e.to_string()))?;
            Ok(a + b)
        };
        let mut value = quad(&integrand)?;
        // only a rounding scale is needed here, and |·| has kinks at the zeros
        let at = |t: f64| {
            integrand(TsPoint {
                x: t,
                from_a: t,
                from_b: t_max - t,
            })
            .norm()
        };
        let abs = gauss_kronrod_real(at, 0.0, split, 1e-3, 200).unwrap_or(f64::INFINITY)
            + gauss_kronrod_real(at, split, t_max, 1e-3, 200).unwrap_or(f64::INFINITY);
        if near_axis {
            let t_m = t_max.powi(mi);
            value += fz / (m as f64 * zm1) * (Complex64::new(1.0, 0.0) - t_m / zeta).ln();
        }
        Ok((value, abs))
    }

    /// Jump, symmetry and decay checks for Y = (p_n, Cp_n) and
    /// Ỹ = (q_n, C̃q_n) at the points `xs` > 0. One-sided values are taken
    /// at angle ±`eps` off the axis.
    pub fn rh_check(&self, xs: &[f64], eps: f64) -> Result<RhReport> {
        let theta = self.spec.theta as f64;
        let n = self.spec.n;
        let mut jump: f64 = 0.0;
        let mut jump_tilde: f64 = 0.0;
        let mut sym: f64 = 0.0;
        for &x in xs {
            let up = Complex64::from_polar(x, eps);
            let down = Complex64::from_polar(x, -eps);
            let (p_up, q_up) = self.cauchy_transforms(up)?;
            let (p_down, q_down) = self.cauchy_transforms(down)?;
            let w = self.spec.weight(x);
            let expected = self.eval_p(n, x) * w / (theta * x.powf(theta - 1.0));
            let scale = expected.abs().max(p_up.norm()).max(p_down.norm());
            jump = jump.max((p_up - p_down - expected).norm() / scale);
            let expected_t = self.eval_q(n, x.powf(theta)) * w;
            let scale_t = expected_t.abs().max(q_up.norm()).max(q_down.norm());
            jump_tilde = jump_tilde.max((q_up - q_down - expected_t).norm() / scale_t);

            let ray = PI / theta - eps;
            let a = self.cauchy_p(Complex64::from_polar(x, ray))?;
            let b = self.cauchy_p(Complex64::from_polar(x, -ray))?;
            sym = sym.max((a - b).norm() / a.norm().max(b.norm()));
            let qa = self.eval_q_complex(n, Complex64::from_polar(x, ray).powf(theta));
            let qb = self.eval_q_complex(n, Complex64::from_polar(x, -ray).powf(theta));
            sym = sym.max((qa - qb).norm() / qa.norm().max(qb.norm()));
        }
        let mut decay = Vec::new();
        for r in [10.0, 20.0, 50.0, 100.0] {
            let z = Complex64::from_polar(r, PI / (2.0 * theta));
            let (cp, cq) = self.cauchy_transforms(z)?;
            let np1 = (n + 1) as i32;
            decay.push((
                r,
                (cp * z.powi(np1 * self.spec.theta as i32)).norm(),
                (cq * z.powi(np1)).norm(),
            ));
        }
        Ok(RhReport {
            jump_residual: jump,
            jump_residual_tilde: jump_tilde,
            symmetry_residual: sym,
            decay,
        })
    }

    /// Leading coefficient κ_n/(2πi)·(−1) of Cp_n at infinity, i.e. the
    /// predicted limit of z^{(n+1)θ} Cp_n(z).
    pub fn cauchy_leading(&self) -> Complex64 {
        Complex64::new(0.0, self.kappa(self.spec.n) / (2.0 * PI))
    }
}

/// Scaled κ_n against its large-n prediction 2π θ^{−1/2} c^{α+1} e^{nℓ}.
pub fn kappa_ratio(kappa_n: &Float, n: usize, theta: u32, alpha: f64, c: f64, ell: f64) -> f64 {
    let prec = kappa_n.prec();
    let log_pred =
        (2.0 * PI).ln() - 0.5 * (theta as f64).ln() + (alpha + 1.0) * c.ln() + n as f64 * ell;
    let ratio = Float::with_val(prec, kappa_n.ln_ref()) - Float::with_val(prec, log_pred);
    ratio.exp().to_f64()
}
