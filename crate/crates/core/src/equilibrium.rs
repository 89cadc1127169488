//! Equilibrium measure of the two-interaction energy
//!
//!   I(ν) = ½∬ log 1/|x−y| + ½∬ log 1/|x^θ−y^θ| + ∫V
//!
//! for a one-cut polynomial potential, supported on [0, b].
//!
//! The constant c of the map J_c is fixed by a contour equation, b follows
//! from c, and the density ψ is computed from the double-log integral over
//! the boundary values I_±. ψ is stored as a Chebyshev interpolant of
//! f(t) = ψ(x(t)) x'(t) in the variable
//!
//!   x(t) = b u^{(1+θ)/θ},  u = 1 − (1 − t)²,
//!
//! which absorbs the x^{−1/(1+θ)} blow-up at 0 and the square-root vanishing
//! at b, so that f is analytic on [0, 1].

use crate::conformal_map::{ConformalError, ConformalMap, GammaCurve};
use crate::potential::{PotentialError, PotentialSpec};
use crate::quad::{gauss_kronrod, tanh_sinh, tanh_sinh_real, Chebyshev, QuadratureError, TsPoint};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquilibriumError {
    #[error("no sign change of F on [{lo}, {hi}] (F = {f_lo:.3e}, {f_hi:.3e})")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("did not converge: {0}")]
    NoConvergence(String),
    #[error(transparent)]
    QuadratureFailure(#[from] QuadratureError),
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("potential is not one-cut regular: {0}")]
    NotRegular(String),
}

type Result<T> = std::result::Result<T, EquilibriumError>;

const QUAD_TOL: f64 = 1e-12;
const GK_TOL: f64 = 1e-13;
const GK_MAX_INTERVALS: usize = 4000;
/// Boundary values closer than this (relative to b) to 0 or b are solved
/// for as offsets from the endpoint of γ₁.
const EDGE_ZONE: f64 = 1e-3;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Radius of the circle about −1/2 used for the c-equation: encloses [−1, 0]
/// and stays clear of s_b = 1/θ.
pub fn contour_radius(theta: f64) -> f64 {
    (0.75f64).min((1.0 / theta + 0.5) * 0.9).max(0.55)
}

fn j_map(c: f64, theta: f64, s: Complex64) -> Complex64 {
    c * (s + 1.0) * (((s + 1.0) / s).ln() / theta).exp()
}

/// F(c) = (1/2πi)∮ V'(J_c(s)) J_c(s)/s ds − (1+θ), by the trapezoid rule on
/// the circle of [`contour_radius`], doubling the node count until two
/// levels agree.
pub fn c_equation(potential: &PotentialSpec, theta: f64, c: f64) -> f64 {
    let r = contour_radius(theta);
    let trapezoid = |n: usize| -> f64 {
        let mut sum = 0.0;
        for k in 0..n {
            let e = Complex64::from_polar(r, 2.0 * PI * (k as f64 + 0.5) / n as f64);
            let s = e - 0.5;
            let j = j_map(c, theta, s);
            // ds/(2πi) = (s + 1/2) dφ/(2π)
            sum += (potential.dv_c(j) * j / s * e).re;
        }
        sum / n as f64
    };
    let mut n = 128;
    let mut prev = trapezoid(n);
    while n < 1 << 16 {
        n *= 2;
        let next = trapezoid(n);
        if (next - prev).abs() <= 1e-14 * next.abs().max(1.0) {
            return next - (1.0 + theta);
        }
        prev = next;
    }
    prev - (1.0 + theta)
}

/// Default bracket (10⁻³, 10θ(1 + Σ|v_m|)).
pub fn default_bracket(potential: &PotentialSpec, theta: f64) -> (f64, f64) {
    let sum: f64 = potential.coefficients.iter().map(|v| v.abs()).sum();
    (1e-3, 10.0 * theta * (1.0 + sum))
}

/// Root of [`c_equation`] in the bracket: bisection down to a relative
/// width of 10⁻⁴, then safeguarded Newton with a central-difference slope.
pub fn solve_c(potential: &PotentialSpec, theta: f64, bracket: Option<(f64, f64)>) -> Result<f64> {
    let (mut lo, mut hi) = bracket.unwrap_or_else(|| default_bracket(potential, theta));
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(EquilibriumError::Domain(format!(
            "bad bracket ({lo}, {hi})"
        )));
    }
    let f = |c: f64| c_equation(potential, theta, c);
    let (f_lo, f_hi) = (f(lo), f(hi));
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo * f_hi < 0.0) {
        return Err(EquilibriumError::NoBracket { lo, hi, f_lo, f_hi });
    }
    let lo_sign = f_lo.signum();
    while hi - lo > 1e-4 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut c = 0.5 * (lo + hi);
    for _ in 0..60 {
        let fc = f(c);
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == lo_sign {
            lo = c;
        } else {
            hi = c;
        }
        let h = 1e-6 * c;
        let slope = (f(c + h) - f(c - h)) / (2.0 * h);
        let mut next = c - fc / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - c).abs() <= 4e-16 * c || hi - lo <= 4e-16 * c {
            return Ok(next);
        }
        c = next;
    }
    Err(EquilibriumError::NoConvergence(format!(
        "Newton for c stalled near {c}"
    )))
}

/// Boundary value I_+(y), carrying the offset from the nearer endpoint
/// of γ₁ at full relative accuracy.
#[derive(Clone, Copy, Debug)]
enum Boundary {
    /// w = I_+ + 1
    NearZero(Complex64),
    /// δ = I_+ − s_b
    NearB(Complex64),
    Interior(Complex64),
}

impl Boundary {
    fn s(self, s_b: f64) -> Complex64 {
        match self {
            Boundary::NearZero(w) => w - 1.0,
            Boundary::NearB(d) => d + s_b,
            Boundary::Interior(s) => s,
        }
    }

    fn plus_one(self, s_b: f64) -> Complex64 {
        match self {
            Boundary::NearZero(w) => w,
            other => other.s(s_b) + 1.0,
        }
    }

    fn minus_sb(self, s_b: f64) -> Complex64 {
        match self {
            Boundary::NearB(d) => d,
            other => other.s(s_b) - s_b,
        }
    }
}

/// I_+(y); `from_b` is b − y, passed separately so it stays accurate near b.
fn i_plus(map: &ConformalMap, y: f64, from_b: f64) -> Result<Boundary> {
    if y < EDGE_ZONE * map.b {
        return Ok(Boundary::NearZero(map.boundary_offset_at_zero(y)?));
    }
    if from_b < EDGE_ZONE * map.b {
        return Ok(Boundary::NearB(map.boundary_offset_at_b(from_b)?));
    }
    Ok(Boundary::Interior(map.boundary_value(y)?))
}

/// Variable change x(t) = b u^{(1+θ)/θ}, u = t(2 − t), and its inverse.
#[derive(Clone, Copy, Debug)]
struct Substitution {
    b: f64,
    theta: f64,
}

impl Substitution {
    fn power(&self) -> f64 {
        (1.0 + self.theta) / self.theta
    }

    fn u(t: f64) -> f64 {
        t * (2.0 - t)
    }

    fn x(&self, t: f64) -> f64 {
        self.b * Self::u(t).powf(self.power())
    }

    /// b − x(t), accurate near t = 1.
    fn b_minus_x(&self, t: f64) -> f64 {
        let v = (1.0 - t) * (1.0 - t);
        -self.b * (self.power() * (-v).ln_1p()).exp_m1()
    }

    fn dx(&self, t: f64) -> f64 {
        let p = self.power();
        self.b * p * Self::u(t).powf(p - 1.0) * 2.0 * (1.0 - t)
    }

    fn t(&self, x: f64) -> f64 {
        let u = (x / self.b).powf(1.0 / self.power());
        1.0 - (1.0 - u).max(0.0).sqrt()
    }
}

/// |a^e − v^e| for u-values a (the pivot) and v with |a − v| = du given
/// separately; `above` says v > a.
fn pow_gap(a: f64, du: f64, e: f64, above: bool) -> f64 {
    if above {
        a.powf(e) * (e * (du / a).ln_1p()).exp_m1()
    } else {
        -a.powf(e) * (e * (-du / a).ln_1p()).exp_m1()
    }
}

/// Reporting summary of the equilibrium constants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub theta: f64,
    pub c: f64,
    pub b: f64,
    pub d1: f64,
    pub d2: f64,
    pub ell: f64,
    pub rho: f64,
}

#[derive(Clone, Debug)]
pub struct EquilibriumMeasure {
    pub theta: f64,
    pub potential: PotentialSpec,
    pub c: f64,
    pub b: f64,
    /// (x, ψ(x)) at the interior interpolation nodes, x increasing.
    pub psi_grid: Vec<(f64, f64)>,
    pub d1: f64,
    pub d2: f64,
    pub ell: f64,
    pub rho: f64,
    pub gamma: GammaCurve,
    map: ConformalMap,
    /// f(t) = ψ(x(t)) x'(t) on [0, 1].
    density: Chebyshev,
}

impl EquilibriumMeasure {
    pub fn solve(potential: &PotentialSpec, theta: f64) -> Result<Self> {
        Self::solve_with_bracket(potential, theta, None)
    }

    pub fn solve_with_bracket(
        potential: &PotentialSpec,
        theta: f64,
        bracket: Option<(f64, f64)>,
    ) -> Result<Self> {
        if !(theta >= 1.0 && theta.is_finite()) {
            return Err(EquilibriumError::Domain(format!(
                "theta = {theta} must be at least 1"
            )));
        }
        potential.validate()?;
        let c = solve_c(potential, theta, bracket)?;
        let map = ConformalMap::new(c, theta)?;
        let b = map.b();
        let gamma = map.trace_gamma(128)?;
        let (d1, d2) = edge_integrals(&map, potential)?;
        let rho = d1 * PI / (theta * (PI / (1.0 + theta)).sin());
        let mut m = Self {
            theta,
            potential: potential.clone(),
            c,
            b,
            psi_grid: Vec::new(),
            d1,
            d2,
            ell: 0.0,
            rho,
            gamma,
            map,
            density: Chebyshev::from_values(0.0, 1.0, vec![0.0, 0.0]),
        };
        m.build_density()?;
        m.ell = m.compute_ell()?;
        Ok(m)
    }

    pub fn map(&self) -> &ConformalMap {
        &self.map
    }

    fn subst(&self) -> Substitution {
        Substitution {
            b: self.b,
            theta: self.theta,
        }
    }

    pub fn report(&self) -> EquilibriumReport {
        EquilibriumReport {
            theta: self.theta,
            c: self.c,
            b: self.b,
            d1: self.d1,
            d2: self.d2,
            ell: self.ell,
            rho: self.rho,
        }
    }

    /// (d₁, d₂, ℓ, ρ).
    pub fn edge_constants(&self) -> (f64, f64, f64, f64) {
        (self.d1, self.d2, self.ell, self.rho)
    }

    /// ψ(x) from the double-log integral over the boundary values I_±.
    pub fn compute_psi(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.par_iter()
            .map(|&x| psi_integral(&self.map, &self.potential, x, self.b - x))
            .collect()
    }

    fn build_density(&mut self) -> Result<()> {
        let sub = self.subst();
        let f0 = 2.0 * sub.power() * self.d1 * self.b.powf(self.theta / (1.0 + self.theta));
        let sample = |t: f64| -> Result<f64> {
            if t >= 1.0 {
                return Ok(0.0);
            }
            if t <= 0.0 {
                return Ok(f0);
            }
            let psi = psi_integral(&self.map, &self.potential, sub.x(t), sub.b_minus_x(t))?;
            Ok(psi * sub.dx(t))
        };
        let mut n = 32;
        let mut values: Vec<f64> = Chebyshev::points(0.0, 1.0, n)
            .par_iter()
            .map(|&t| sample(t))
            .collect::<Result<_>>()?;
        loop {
            let cheb = Chebyshev::from_values(0.0, 1.0, values.clone());
            let tail = cheb.tail_ratio();
            if tail < 1e-11 || n >= 512 {
                if tail > 1e-7 {
                    return Err(EquilibriumError::NoConvergence(format!(
                        "density interpolant tail {tail:.2e} at degree {n}"
                    )));
                }
                self.density = cheb;
                break;
            }
            // the extreme points of degree 2n contain those of degree n
            let fine = Chebyshev::points(0.0, 1.0, 2 * n);
            let odd: Vec<f64> = fine.iter().skip(1).step_by(2).copied().collect();
            let new_vals: Vec<f64> = odd.par_iter().map(|&t| sample(t)).collect::<Result<_>>()?;
            let mut merged = Vec::with_capacity(2 * n + 1);
            for j in 0..=2 * n {
                merged.push(if j % 2 == 0 {
                    values[j / 2]
                } else {
                    new_vals[j / 2]
                });
            }
            values = merged;
            n *= 2;
        }
        let nodes = &self.density.nodes;
        let mut grid = Vec::new();
        for (j, &t) in nodes.iter().enumerate().rev() {
            if t <= 0.0 || t >= 1.0 {
                continue;
            }
            let psi = self.density.values[j] / sub.dx(t);
            if psi < -1e-8 {
                return Err(EquilibriumError::NotRegular(format!(
                    "negative density {psi:.3e} at x = {:.6e}",
                    sub.x(t)
                )));
            }
            grid.push((sub.x(t), psi));
        }
        self.psi_grid = grid;
        Ok(())
    }

    /// ψ(x) from the stored interpolant; 0 outside (0, b).
    pub fn psi(&self, x: f64) -> f64 {
        if !(x > 0.0 && x < self.b) {
            return 0.0;
        }
        let sub = self.subst();
        let t = sub.t(x);
        if t >= 1.0 {
            return 0.0;
        }
        self.density.eval(t) / sub.dx(t)
    }

    /// ∫ψ over [0, b].
    pub fn mass(&self) -> f64 {
        self.density.integral()
    }

    /// ∫_x^b ψ.
    pub fn mass_above(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.mass();
        }
        if x >= self.b {
            return 0.0;
        }
        self.density.integral_between(self.subst().t(x), 1.0)
    }

    /// ∫₀ᵇ k(x(t)) f(t) w(x(t)) dt by tanh-sinh, split at `split`.
    fn integrate_t(
        &self,
        split: Option<f64>,
        kernel: impl Fn(TsPoint, bool) -> f64 + Sync,
    ) -> Result<f64> {
        match split {
            Some(ts) if ts > 0.0 && ts < 1.0 => {
                let left = tanh_sinh_real(|p| kernel(p, false), 0.0, ts, QUAD_TOL)?;
                let right = tanh_sinh_real(|p| kernel(p, true), ts, 1.0, QUAD_TOL)?;
                Ok(left + right)
            }
            _ => Ok(tanh_sinh_real(|p| kernel(p, true), 0.0, 1.0, QUAD_TOL)?),
        }
    }

    /// (∫ ln|x−y| ψ(y) w(y) dy, ∫ ln|x^θ−y^θ| ψ(y) w(y) dy) for real x ≥ 0.
    pub fn log_potentials(&self, x: f64, w: impl Fn(f64) -> f64 + Sync) -> Result<(f64, f64)> {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(EquilibriumError::Domain(format!(
                "x = {x} must be nonnegative"
            )));
        }
        let sub = self.subst();
        let (p, th, b) = (sub.power(), self.theta, self.b);
        if x == 0.0 {
            let v = self.integrate_t(None, |pt, _| {
                let y = sub.x(pt.x);
                self.density.eval(pt.x) * w(y) * (b.ln() + p * Substitution::u(pt.x).ln())
            })?;
            return Ok((v, th * v));
        }
        if x >= b {
            let gap = x - b;
            let gap_th = x.powf(th) - b.powf(th);
            let pair = |pt: TsPoint| -> (f64, f64, f64) {
                let t = pt.x;
                let v = (1.0 - t) * (1.0 - t);
                let bx = sub.b_minus_x(t).max(0.0);
                let bx_th = -b.powf(th) * ((1.0 + th) * (-v).ln_1p()).exp_m1();
                let fw = self.density.eval(t) * w(sub.x(t));
                (fw, (gap + bx).ln(), (gap_th + bx_th).ln())
            };
            let a = self.integrate_t(None, |pt, _| {
                let (fw, l1, _) = pair(pt);
                if fw == 0.0 {
                    0.0
                } else {
                    fw * l1
                }
            })?;
            let c = self.integrate_t(None, |pt, _| {
                let (fw, _, l2) = pair(pt);
                if fw == 0.0 {
                    0.0
                } else {
                    fw * l2
                }
            })?;
            return Ok((a, c));
        }
        let tx = sub.t(x);
        let ux = Substitution::u(tx);
        let ln_b = b.ln();
        let ln_bth = th * ln_b;
        let logs = |pt: TsPoint, above: bool| -> (f64, f64, f64) {
            let t = pt.x;
            let dt = if above { pt.from_a } else { pt.from_b };
            let du = dt * (2.0 - tx - t);
            let (g1, g2) = (pow_gap(ux, du, p, above), pow_gap(ux, du, 1.0 + th, above));
            if !(g1 > 0.0 && g2 > 0.0) {
                // a node that rounds onto the singular point itself
                return (0.0, 0.0, 0.0);
            }
            let fw = self.density.eval(t) * w(sub.x(t));
            (fw, ln_b + g1.ln(), ln_bth + g2.ln())
        };
        let l1 = self.integrate_t(Some(tx), |pt, above| {
            let (fw, a, _) = logs(pt, above);
            if fw == 0.0 {
                0.0
            } else {
                fw * a
            }
        })?;
        let l2 = self.integrate_t(Some(tx), |pt, above| {
            let (fw, _, c) = logs(pt, above);
            if fw == 0.0 {
                0.0
            } else {
                fw * c
            }
        })?;
        Ok((l1, l2))
    }

    /// ℓ = g(b) + g̃(b) − V(b); both g-functions are real at x = b.
    fn compute_ell(&self) -> Result<f64> {
        let (a, c) = self.log_potentials(self.b, |_| 1.0)?;
        Ok(a + c - self.potential.v(self.b))
    }

    pub fn g_functions(&self) -> GFunctions<'_> {
        GFunctions {
            measure: self,
            tol: GK_TOL,
        }
    }

    /// Mass, Euler–Lagrange and edge-exponent checks on fixed sample points:
    /// 32 interior points for Re φ, 20 points on (b, b + 5] for φ < 0, and
    /// log-log fits over h ∈ [10⁻⁸, 10⁻⁶]·b at both edges.
    pub fn verify(&self) -> Result<EquilibriumChecks> {
        let gf = self.g_functions();
        let interior: Vec<f64> = (1..=32).map(|k| self.b * k as f64 / 33.0).collect();
        let re_phi = interior
            .par_iter()
            .map(|&x| gf.phi_boundary(x, Side::Plus).map(|p| p.re.abs()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let outside: Vec<f64> = (1..=20).map(|k| self.b + 0.25 * k as f64).collect();
        let phi_max = outside
            .par_iter()
            .map(|&x| gf.eval_phi(c64(x, 0.0)).map(|p| p.re))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        let hs: Vec<f64> = (0..5)
            .map(|k| self.b * 10f64.powf(-8.0 + 0.5 * k as f64))
            .collect();
        let near0: Vec<(f64, f64)> = hs.iter().map(|&h| (h.ln(), self.psi(h).ln())).collect();
        let near_b: Vec<(f64, f64)> = hs
            .iter()
            .map(|&h| (h.ln(), self.psi(self.b - h).ln()))
            .collect();
        Ok(EquilibriumChecks {
            mass_error: (self.mass() - 1.0).abs(),
            re_phi_sup: re_phi,
            phi_max_outside: phi_max,
            slope_at_zero: least_squares_slope(&near0),
            slope_at_b: least_squares_slope(&near_b),
        })
    }
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    num / den
}

/// Output of [`EquilibriumMeasure::verify`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquilibriumChecks {
    /// |∫ψ − 1|.
    pub mass_error: f64,
    /// sup |Re φ_+| on (0, b).
    pub re_phi_sup: f64,
    /// max φ on (b, b + 5]; negative when the inequality holds.
    pub phi_max_outside: f64,
    /// Fitted exponent of ψ at 0, expected −1/(1+θ).
    pub slope_at_zero: f64,
    /// Fitted exponent of ψ at b, expected 1/2.
    pub slope_at_b: f64,
}

impl EquilibriumChecks {
    pub fn passes(&self, theta: f64) -> bool {
        self.mass_error < 1e-6
            && self.re_phi_sup < 1e-6
            && self.phi_max_outside < 0.0
            && (self.slope_at_zero + 1.0 / (1.0 + theta)).abs() < 0.01
            && (self.slope_at_b - 0.5).abs() < 0.01
    }
}

/// d₁ and d₂ from the integrals of (V''y + V') against Im 1/(1 + I_+) and
/// Im 1/(I_+ − s_b).
fn edge_integrals(map: &ConformalMap, v: &PotentialSpec) -> Result<(f64, f64)> {
    let (th, b) = (map.theta, map.b);
    let weight = |y: f64| v.d2v(y) * y + v.dv(y);
    let sb = map.s_b;
    let k1 = tanh_sinh_real(
        |p| match i_plus(map, p.x, p.from_b) {
            Ok(s) => weight(p.x) * (1.0 / s.plus_one(sb)).im,
            Err(_) => f64::NAN,
        },
        0.0,
        b,
        QUAD_TOL,
    )?;
    let k2 = tanh_sinh_real(
        |p| match i_plus(map, p.x, p.from_b) {
            Ok(s) => weight(p.x) * (1.0 / s.minus_sb(sb)).im,
            Err(_) => f64::NAN,
        },
        0.0,
        b,
        QUAD_TOL,
    )?;
    let d1 = -map.c.powf(-th / (1.0 + th)) * (PI / (1.0 + th)).sin() * k1 / (PI * PI);
    let d2 = -(2.0 / map.j_second_at_sb()).sqrt() * k2 / (PI * PI * b);
    Ok((d1, d2))
}

/// ψ(x) = (1/2π²x) ∫₀ᵇ (V''y + V') log|(I_+(y) − I_−(x))/(I_+(y) − I_+(x))| dy.
///
/// With q = 2i Im I_+(x)/(I_+(y) − I_+(x)) the log is ½ log(1 + 2Re q + |q|²).
/// The integrand is scaled by 1/Im I_+(x) so the quadrature tolerance is
/// relative also near the edges.
fn psi_integral(map: &ConformalMap, v: &PotentialSpec, x: f64, from_b: f64) -> Result<f64> {
    let b = map.b;
    if !(x > 0.0 && from_b > 0.0) {
        return Err(EquilibriumError::Domain(format!(
            "x = {x} must lie in (0, b)"
        )));
    }
    let sx = i_plus(map, x, from_b)?.s(map.s_b);
    let dsx = map.boundary_derivative(x).unwrap_or(c64(0.0, 0.0));
    let im = sx.im;
    let weight = |y: f64| v.d2v(y) * y + v.dv(y);
    // y − x = signed_gap; b − y = dist_b
    let integrand = |y: f64, signed_gap: f64, dist_b: f64| -> f64 {
        let d = if signed_gap.abs() < 1e-9 * b && dsx.norm() > 0.0 {
            signed_gap * dsx
        } else {
            match i_plus(map, y, dist_b) {
                Ok(s) => s.s(map.s_b) - sx,
                Err(_) => return f64::NAN,
            }
        };
        let q = c64(0.0, 2.0 * im) / d;
        let arg = 2.0 * q.re + q.norm_sqr();
        weight(y) * 0.5 * arg.ln_1p() / im
    };
    let left = tanh_sinh_real(
        |p| integrand(p.x, -p.from_b, from_b + p.from_b),
        0.0,
        x,
        QUAD_TOL,
    )?;
    let right = tanh_sinh_real(|p| integrand(p.x, p.from_a, p.from_b), x, b, QUAD_TOL)?;
    Ok(im * (left + right) / (2.0 * PI * PI * x))
}

/// Side of a boundary value on the real axis: + from above, − from below.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Fit of the z^{θ/(1+θ)} coefficient of g − g_+(0) or g̃ − g̃_+(0) on one ray.
#[derive(Clone, Debug, Serialize)]
pub struct RayFit {
    pub function: &'static str,
    pub arg: f64,
    pub radius: f64,
    pub coefficient: (f64, f64),
    pub predicted: (f64, f64),
    pub modulus_deviation: f64,
    pub phase_deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroExpansionReport {
    pub rays: Vec<RayFit>,
}

impl ZeroExpansionReport {
    pub fn max_modulus_deviation(&self) -> f64 {
        self.rays
            .iter()
            .map(|r| r.modulus_deviation)
            .fold(0.0, f64::max)
    }

    pub fn max_phase_deviation(&self) -> f64 {
        self.rays
            .iter()
            .map(|r| r.phase_deviation)
            .fold(0.0, f64::max)
    }
}

/// Evaluators of g(z) = ∫ log(z − y) ψ(y) dy and g̃(z) = ∫ log(z^θ − y^θ) ψ(y) dy.
#[derive(Clone, Copy, Debug)]
pub struct GFunctions<'a> {
    pub measure: &'a EquilibriumMeasure,
    /// Relative tolerance of the adaptive quadrature.
    pub tol: f64,
}

impl<'a> GFunctions<'a> {
    pub fn new(measure: &'a EquilibriumMeasure) -> Self {
        measure.g_functions()
    }

    fn integrate(&self, k: impl Fn(f64) -> Complex64) -> Result<Complex64> {
        let m = self.measure;
        let sub = m.subst();
        Ok(gauss_kronrod(
            |t| m.density.eval(t) * k(sub.x(t)),
            0.0,
            1.0,
            self.tol,
            GK_MAX_INTERVALS,
        )?)
    }

    /// g(z) for z ∉ (−∞, b].
    pub fn eval_g(&self, z: Complex64) -> Result<Complex64> {
        if !z.is_finite() || z.im == 0.0 && z.re <= self.measure.b {
            return Err(EquilibriumError::Domain(format!(
                "g is not defined at z = {z}"
            )));
        }
        self.integrate(|y| (z - y).ln())
    }

    fn in_sector(&self, z: Complex64) -> bool {
        z.is_finite() && z != c64(0.0, 0.0) && z.arg().abs() < PI / self.measure.theta
    }

    /// g̃(z) for |arg z| < π/θ, z ∉ [0, b].
    pub fn eval_g_tilde(&self, z: Complex64) -> Result<Complex64> {
        let th = self.measure.theta;
        if !self.in_sector(z) || z.im == 0.0 && z.re <= self.measure.b {
            return Err(EquilibriumError::Domain(format!(
                "g~ is not defined at z = {z}"
            )));
        }
        let zt = Complex64::from_polar(z.norm().powf(th), th * z.arg());
        self.integrate(|y| (zt - y.powf(th)).ln())
    }

    /// φ(z) = g(z) + g̃(z) − V(z) − ℓ.
    pub fn eval_phi(&self, z: Complex64) -> Result<Complex64> {
        let m = self.measure;
        Ok(self.eval_g(z)? + self.eval_g_tilde(z)? - m.potential.v_c(z) - m.ell)
    }

    /// g'(z) = ∫ ψ(y)/(z − y) dy.
    pub fn eval_g_prime(&self, z: Complex64) -> Result<Complex64> {
        if !z.is_finite() || z.im == 0.0 && (0.0..=self.measure.b).contains(&z.re) {
            return Err(EquilibriumError::Domain(format!(
                "g' is not defined at z = {z}"
            )));
        }
        self.integrate(|y| 1.0 / (z - y))
    }

    /// g_±(x) = ∫ ln|x − y| ψ ± iπ ∫_{y>x} ψ, for real x ≥ 0.
    pub fn g_boundary(&self, x: f64, side: Side) -> Result<Complex64> {
        let (l1, _) = self.measure.log_potentials(x, |_| 1.0)?;
        Ok(c64(l1, side.sign() * PI * self.measure.mass_above(x)))
    }

    /// g̃_±(x) = ∫ ln|x^θ − y^θ| ψ ± iπ ∫_{y>x} ψ, for real x ≥ 0.
    pub fn g_tilde_boundary(&self, x: f64, side: Side) -> Result<Complex64> {
        let (_, l2) = self.measure.log_potentials(x, |_| 1.0)?;
        Ok(c64(l2, side.sign() * PI * self.measure.mass_above(x)))
    }

    /// φ_±(x) = g_±(x) + g̃_±(x) − V(x) − ℓ on the real axis.
    pub fn phi_boundary(&self, x: f64, side: Side) -> Result<Complex64> {
        let m = self.measure;
        let (l1, l2) = m.log_potentials(x, |_| 1.0)?;
        Ok(c64(
            l1 + l2 - m.potential.v(x) - m.ell,
            2.0 * side.sign() * PI * m.mass_above(x),
        ))
    }

    /// Re g(0) = ∫ ln y ψ(y) dy; g_+(0) = Re g(0) + iπ.
    pub fn re_g_at_zero(&self) -> Result<f64> {
        Ok(self.measure.log_potentials(0.0, |_| 1.0)?.0)
    }

    /// Re g̃(0) = θ Re g(0).
    pub fn re_g_tilde_at_zero(&self) -> Result<f64> {
        Ok(self.measure.theta * self.re_g_at_zero()?)
    }

    /// −(1/2πi)(g'_+ − g'_−)(x) from g' at x ± iδ, Richardson-extrapolated
    /// over δ, δ/2, δ/4.
    pub fn psi_from_g_jump(&self, x: f64, delta: f64) -> Result<f64> {
        let mut v = [0.0; 3];
        for (k, vk) in v.iter_mut().enumerate() {
            let d = delta / (1u32 << k) as f64;
            // g' is conjugate-symmetric, so g'_+ − g'_− = 2i Im g'(x + iδ)
            *vk = -self.eval_g_prime(c64(x, d))?.im / PI;
        }
        let r1 = [2.0 * v[1] - v[0], 2.0 * v[2] - v[1]];
        Ok((4.0 * r1[1] - r1[0]) / 3.0)
    }

    /// ∫ Log(1 − z^e/y^e) ψ(y) dy, split where y = |z| so both pieces only
    /// carry endpoint singularities.
    fn log_one_minus(&self, z: Complex64, e: f64) -> Result<Complex64> {
        let m = self.measure;
        let sub = m.subst();
        let ze = Complex64::from_polar(z.norm().powf(e), e * z.arg());
        let k = |p: TsPoint| {
            let y = sub.x(p.x);
            if y <= 0.0 {
                return c64(0.0, 0.0);
            }
            m.density.eval(p.x) * (1.0 - ze / y.powf(e)).ln()
        };
        let tz = sub.t(z.norm().min(0.5 * m.b));
        let a = tanh_sinh(k, 0.0, tz, QUAD_TOL)?;
        let b = tanh_sinh(k, tz, 1.0, QUAD_TOL)?;
        Ok(a + b)
    }

    /// Compares g − g_+(0) and g̃ − g̃_+(0) on the bisecting rays of the upper
    /// and lower half-planes (resp. half-sectors) with the predicted leading
    /// terms (1+θ)d₁π/θ · e^{iωπ}/sin(π/(1+θ)) z^{θ/(1+θ)}. The coefficient is
    /// read off at |z| = `radius` and `radius`/4 and extrapolated in r.
    pub fn verify_g_zero_expansion(&self, radius: f64) -> Result<ZeroExpansionReport> {
        let m = self.measure;
        let th = m.theta;
        if th <= 1.0 {
            return Err(EquilibriumError::Domain(
                "the zero expansion needs theta > 1".into(),
            ));
        }
        let k = (1.0 + th) * m.d1 * PI / (th * (PI / (1.0 + th)).sin());
        let e = th / (1.0 + th);
        // (name, ray, phase/π, power of z inside the log, relative order of
        // the next correction)
        let cases: [(&'static str, f64, f64, f64, f64); 4] = [
            (
                "g",
                PI / 2.0,
                (2.0 + th) / (1.0 + th),
                1.0,
                1.0 / (1.0 + th),
            ),
            ("g", -PI / 2.0, th / (1.0 + th), 1.0, 1.0 / (1.0 + th)),
            (
                "g_tilde",
                PI / (2.0 * th),
                (1.0 + 2.0 * th) / (1.0 + th),
                th,
                e,
            ),
            (
                "g_tilde",
                -PI / (2.0 * th),
                (3.0 + 2.0 * th) / (1.0 + th),
                th,
                e,
            ),
        ];
        let lambda: f64 = 0.25;
        let mut rays = Vec::new();
        for (name, arg, omega, power, order) in cases {
            // g − g_+(0) = ∫ Log(1 − z/y) ψ, and −2πi more below the axis;
            // the −2πi is part of the predicted form, so it cancels.
            let coef_at = |r: f64| -> Result<Complex64> {
                let z = Complex64::from_polar(r, arg);
                Ok(self.log_one_minus(z, power)? / Complex64::from_polar(r.powf(e), e * arg))
            };
            let (c1, c2) = (coef_at(radius)?, coef_at(lambda * radius)?);
            // remove the leading correction ∝ r^order
            let q = lambda.powf(order);
            let coef = (c2 - q * c1) / (1.0 - q);
            let predicted = Complex64::from_polar(k, omega * PI);
            let phase = (coef / predicted).arg().abs();
            rays.push(RayFit {
                function: name,
                arg,
                radius,
                coefficient: (coef.re, coef.im),
                predicted: (predicted.re, predicted.im),
                modulus_deviation: (coef.norm() / k - 1.0).abs(),
                phase_deviation: phase,
            });
        }
        Ok(ZeroExpansionReport { rays })
    }

    /// I(μ + εh) − I(μ) for ten mass-preserving perturbations
    /// h = ψ (p − ∫pψ), p ∈ {cos(kπx/b), sin(kπx/b) : k = 1..5}, from the
    /// first variation ε∫(V − U)h and the quadratic term
    /// ε²·½∬ (log 1/|x−y| + log 1/|x^θ−y^θ|) h(x) h(y).
    pub fn energy_probe(&self, epsilon: f64) -> Result<Vec<f64>> {
        let m = self.measure;
        let b = m.b;
        let sub = m.subst();
        let probes: Vec<Box<dyn Fn(f64) -> f64 + Sync + Send>> = (1..=5)
            .flat_map(|k| {
                let kk = k as f64;
                let c: Box<dyn Fn(f64) -> f64 + Sync + Send> =
                    Box::new(move |x: f64| (kk * PI * x / b).cos());
                let s: Box<dyn Fn(f64) -> f64 + Sync + Send> =
                    Box::new(move |x: f64| (kk * PI * x / b).sin());
                [c, s]
            })
            .collect();
        probes
            .par_iter()
            .map(|p| {
                let mean = tanh_sinh_real(
                    |pt| m.density.eval(pt.x) * p(sub.x(pt.x)),
                    0.0,
                    1.0,
                    QUAD_TOL,
                )?;
                let wt = |y: f64| p(y) - mean;
                let outer = |pt: TsPoint| -> f64 {
                    let x = sub.x(pt.x);
                    let hx = m.density.eval(pt.x) * wt(x);
                    if hx == 0.0 || x <= 0.0 {
                        return 0.0;
                    }
                    let (u1, u2) = match m.log_potentials(x, |_| 1.0) {
                        Ok(v) => v,
                        Err(_) => return f64::NAN,
                    };
                    let (h1, h2) = match m.log_potentials(x, wt) {
                        Ok(v) => v,
                        Err(_) => return f64::NAN,
                    };
                    let linear = (m.potential.v(x) - u1 - u2) * hx;
                    let quadratic = -0.5 * (h1 + h2) * hx;
                    epsilon * linear + epsilon * epsilon * quadratic
                };
                Ok(tanh_sinh_real(outer, 0.0, 1.0, 1e-9)?)
            })
            .collect()
    }
}
