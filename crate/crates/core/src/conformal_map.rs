//! The map J_c(s) = c (s+1) ((s+1)/s)^{1/θ} and its inverse branches.
//!
//! J_c has critical points s = −1 and s_b = 1/θ with J_c(−1) = 0 and
//! J_c(s_b) = b. Two conjugate curves γ₁ (upper) and γ₂ (lower) from −1 to s_b
//! bound a region D; J_c maps the exterior of D onto ℂ∖[0,b] (inverse I₁)
//! and D∖[−1,0] onto the sector H_θ∖[0,b] (inverse I₂). The boundary values
//! I_±(x), x ∈ [0,b], are the points of γ₁ and γ₂ over x.
//!
//! Inversion solves Log(J_c(s)/z) = 0 by Newton's method, which stays well
//! conditioned near s = −1 and at infinity, with radial continuation in z
//! from a large radius where the inverse has an explicit expansion.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConformalError {
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("inversion did not converge: {0}")]
    NoConvergence(String),
}

const NEWTON_TOL: f64 = 4e-15;
const TRACE_POINTS: usize = 256;

#[derive(Clone, Debug)]
pub struct ConformalMap {
    pub c: f64,
    pub theta: f64,
    pub s_b: f64,
    pub b: f64,
    /// Reference samples of γ₁, used to seed boundary-value solves.
    trace: Vec<(f64, Complex64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaCurve {
    /// (x, I_+(x), I_−(x)) with x increasing from 0 to b.
    pub samples: Vec<(f64, Complex64, Complex64)>,
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// log(1 + u) − u, by its Taylor series for small u.
fn ln_1p_minus_u(u: Complex64) -> Complex64 {
    if u.norm() > 0.1 {
        let l = c64(
            0.5 * (2.0 * u.re + u.norm_sqr()).ln_1p(),
            u.im.atan2(1.0 + u.re),
        );
        return l - u;
    }
    let mut term = u;
    let mut sum = c64(0.0, 0.0);
    for k in 2..40 {
        term *= -u;
        sum += term / k as f64;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

impl ConformalMap {
    pub fn new(c: f64, theta: f64) -> Result<Self, ConformalError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(ConformalError::DomainError(format!(
                "c = {c} must be positive"
            )));
        }
        if !(theta >= 1.0 && theta.is_finite()) {
            return Err(ConformalError::DomainError(format!(
                "theta = {theta} must be at least 1"
            )));
        }
        let b = c / theta * (1.0 + theta).powf(1.0 + 1.0 / theta);
        let mut map = Self {
            c,
            theta,
            s_b: 1.0 / theta,
            b,
            trace: Vec::new(),
        };
        let curve = map.trace_gamma(TRACE_POINTS)?;
        map.trace = curve.samples.iter().map(|&(x, p, _)| (x, p)).collect();
        Ok(map)
    }

    /// b = c θ^{−1} (1+θ)^{1+1/θ}.
    pub fn b(&self) -> f64 {
        self.b
    }

    fn check_off_cut(&self, s: Complex64) -> Result<(), ConformalError> {
        if s.im == 0.0 && (-1.0..=0.0).contains(&s.re) {
            return Err(ConformalError::DomainError(format!(
                "s = {s} lies on the cut [-1, 0]"
            )));
        }
        Ok(())
    }

    fn j_unchecked(&self, s: Complex64) -> Complex64 {
        let ratio = (s + 1.0) / s;
        self.c * (s + 1.0) * (ratio.ln() / self.theta).exp()
    }

    /// J'/J = (θs − 1)/(θ s (s+1)).
    fn log_derivative(&self, s: Complex64) -> Complex64 {
        (self.theta * s - 1.0) / (self.theta * s * (s + 1.0))
    }

    pub fn eval_j(&self, s: Complex64) -> Result<Complex64, ConformalError> {
        self.check_off_cut(s)?;
        Ok(self.j_unchecked(s))
    }

    pub fn eval_j_prime(&self, s: Complex64) -> Result<Complex64, ConformalError> {
        self.check_off_cut(s)?;
        Ok(self.j_unchecked(s) * self.log_derivative(s))
    }

    pub fn eval_j_second(&self, s: Complex64) -> Result<Complex64, ConformalError> {
        self.check_off_cut(s)?;
        let l = self.log_derivative(s);
        // d/ds of (θs−1)/(θs(s+1))
        let th = self.theta;
        let den = th * s * (s + 1.0);
        let dl = (th * den - (th * s - 1.0) * th * (2.0 * s + 1.0)) / (den * den);
        Ok(self.j_unchecked(s) * (l * l + dl))
    }

    /// J''(s_b) = bθ²/(θ+1).
    pub fn j_second_at_sb(&self) -> f64 {
        self.b * self.theta * self.theta / (self.theta + 1.0)
    }

    /// Newton iteration on Log(J(s)/z) = 0 from `s`. Stops at a tiny step or
    /// once the steps stop shrinking at rounding level.
    fn newton(&self, z: Complex64, mut s: Complex64, max_iter: usize) -> Option<Complex64> {
        let mut prev = f64::INFINITY;
        for _ in 0..max_iter {
            if s.im == 0.0 && (-1.0..=0.0).contains(&s.re) {
                s.im = 1e-300_f64.max(1e-15 * s.re.abs());
            }
            let f = (self.j_unchecked(s) / z).ln();
            let d = self.log_derivative(s);
            let step = f / d;
            if !step.is_finite() {
                return None;
            }
            s -= step;
            let size = step.norm();
            let scale = s.norm().max(1e-3);
            if size <= NEWTON_TOL * scale || (size < 1e-10 * scale && size >= 0.5 * prev) {
                let f = (self.j_unchecked(s) / z).ln();
                return (f.norm() < 1e-8).then_some(s);
            }
            prev = size;
        }
        None
    }

    /// Tracks the root of J(s) = r e^{iφ} from `s0` at radius `r0` to `r1`,
    /// stepping in log r with step length tied to the distance from the
    /// critical points.
    fn radial_continuation(
        &self,
        phi: f64,
        r0: f64,
        r1: f64,
        s0: Complex64,
    ) -> Result<Complex64, ConformalError> {
        let (t0, t1) = (r0.ln(), r1.ln());
        let mut t = t0;
        let mut s = s0;
        let mut steps = 0;
        while t != t1 {
            // ds/dt = z/J'(s) = 1/(J'/J)
            let v = 1.0 / self.log_derivative(s);
            let dist = (s - self.s_b).norm().min((s + 1.0).norm()).max(1e-300);
            let mut dt = (0.1 * dist / v.norm().max(1e-300)).min(0.25);
            loop {
                let tn = if t1 < t0 {
                    (t - dt).max(t1)
                } else {
                    (t + dt).min(t1)
                };
                let zn = Complex64::from_polar(tn.exp(), phi);
                let pred = s + v * (tn - t);
                if let Some(sn) = self.newton(zn, pred, 30) {
                    if (sn - pred).norm() < 0.3 * dist {
                        s = sn;
                        t = tn;
                        break;
                    }
                }
                dt *= 0.25;
                if dt < 1e-14 {
                    return Err(ConformalError::NoConvergence(format!(
                        "continuation stalled at |z| = {:.6e}, arg {phi:.6}",
                        t.exp()
                    )));
                }
            }
            steps += 1;
            if steps > 1_000_000 {
                return Err(ConformalError::NoConvergence(
                    "continuation step limit".into(),
                ));
            }
        }
        Ok(s)
    }

    /// I₁(z): the preimage outside D, for z ∉ [0, b].
    pub fn invert_outer(&self, z: Complex64) -> Result<Complex64, ConformalError> {
        if !z.is_finite() || z.im == 0.0 && (0.0..=self.b).contains(&z.re) {
            return Err(ConformalError::DomainError(format!(
                "z = {z} lies on [0, b]"
            )));
        }
        let r1 = z.norm();
        let phi = z.arg();
        let r0 = r1.max(1e3 * (self.b + self.c));
        let z0 = Complex64::from_polar(r0, phi);
        let seed = z0 / self.c - (1.0 + 1.0 / self.theta);
        let s0 = self.newton(z0, seed, 50).ok_or_else(|| {
            ConformalError::NoConvergence(format!("no outer root at |z| = {r0:e}"))
        })?;
        self.radial_continuation(phi, r0, r1, s0)
    }

    /// I₂(z): the preimage inside D, for z in the sector |arg z| < π/θ off [0, b].
    pub fn invert_inner(&self, z: Complex64) -> Result<Complex64, ConformalError> {
        let phi = z.arg();
        if !z.is_finite() || z == c64(0.0, 0.0) || phi.abs() >= PI / self.theta {
            return Err(ConformalError::DomainError(format!(
                "z = {z} is outside the sector |arg z| < pi/theta"
            )));
        }
        if z.im == 0.0 && z.re <= self.b {
            return Err(ConformalError::DomainError(format!(
                "z = {z} lies on [0, b]"
            )));
        }
        let r1 = z.norm();
        let r0 = r1.max(1e3 * (self.b + self.c));
        let z0 = Complex64::from_polar(r0, phi);
        // s = (c/z)^θ (1+s)^{θ+1}
        let lead = (self.theta * (self.c.ln() - z0.ln())).exp();
        let mut seed = lead;
        for _ in 0..20 {
            seed = lead * ((self.theta + 1.0) * (1.0 + seed).ln()).exp();
        }
        let s0 = self.newton(z0, seed, 50).ok_or_else(|| {
            ConformalError::NoConvergence(format!("no inner root at |z| = {r0:e}"))
        })?;
        self.radial_continuation(phi, r0, r1, s0)
    }

    /// Leading small-x behaviour of I_+(x): −1 + c^{−θ/(1+θ)} e^{πi/(1+θ)} x^{θ/(1+θ)}.
    fn seed_near_zero(&self, x: f64) -> Complex64 {
        let th = self.theta;
        -1.0 + self.c.powf(-th / (1.0 + th))
            * Complex64::from_polar(x.powf(th / (1.0 + th)), PI / (1.0 + th))
    }

    /// s_b + i √(2(b−x)/J''(s_b)).
    fn seed_near_b(&self, x: f64) -> Complex64 {
        c64(
            self.s_b,
            (2.0 * (self.b - x) / self.j_second_at_sb()).sqrt(),
        )
    }

    /// I_+(x) on γ₁ (closed upper half-plane), for x ∈ [0, b].
    pub fn boundary_value(&self, x: f64) -> Result<Complex64, ConformalError> {
        if !(0.0..=self.b).contains(&x) {
            return Err(ConformalError::DomainError(format!(
                "x = {x} is outside [0, b]"
            )));
        }
        if x == 0.0 {
            return Ok(c64(-1.0, 0.0));
        }
        if x == self.b {
            return Ok(c64(self.s_b, 0.0));
        }
        let z = c64(x, 0.0);
        let mut seeds = Vec::with_capacity(3);
        if !self.trace.is_empty() {
            let idx = self.trace.partition_point(|p| p.0 < x);
            for j in [idx.saturating_sub(1), idx.min(self.trace.len() - 1)] {
                let (xj, sj) = self.trace[j];
                // first-order correction along the curve
                let d = self.log_derivative(sj);
                let corr = if d.norm() > 0.0 && xj > 0.0 && xj < self.b {
                    (x / xj).ln() / d
                } else {
                    c64(0.0, 0.0)
                };
                seeds.push(sj + corr);
                seeds.push(sj);
            }
        }
        if x < 0.05 * self.b || self.trace.is_empty() {
            seeds.insert(0, self.seed_near_zero(x));
        }
        if self.b - x < 0.05 * self.b || self.trace.is_empty() {
            seeds.insert(0, self.seed_near_b(x));
        }
        for seed in seeds {
            if let Some(s) = self.newton(z, seed, 60) {
                if s.im > 0.0 && s.re > -1.0 - 1e-12 && s.re < self.s_b + 1e-12 {
                    return Ok(s);
                }
            }
        }
        Err(ConformalError::NoConvergence(format!(
            "boundary value at x = {x}"
        )))
    }

    /// w = I_+(x) + 1 for small x, solved in the variable w itself so that
    /// it keeps full relative accuracy as x → 0.
    pub fn boundary_offset_at_zero(&self, x: f64) -> Result<Complex64, ConformalError> {
        if !(x > 0.0 && x < self.b) {
            return Err(ConformalError::DomainError(format!(
                "x = {x} is outside (0, b)"
            )));
        }
        let th = self.theta;
        let rhs = x.ln() - self.c.ln();
        let mut w = self.seed_near_zero(x) + 1.0;
        let mut prev = f64::INFINITY;
        for _ in 0..60 {
            // ln J = ln c + ln w + (1/θ) ln(w/(w−1))
            let f = w.ln() + (w / (w - 1.0)).ln() / th - rhs;
            let d = 1.0 / w + (1.0 / w - 1.0 / (w - 1.0)) / th;
            let step = f / d;
            if !step.is_finite() {
                break;
            }
            w -= step;
            let size = step.norm();
            if size <= NEWTON_TOL * w.norm() || size < 1e-9 * w.norm() && size >= 0.5 * prev {
                if w.im > 0.0 {
                    return Ok(w);
                }
                break;
            }
            prev = size;
        }
        Err(ConformalError::NoConvergence(format!(
            "offset from -1 at x = {x:e}"
        )))
    }

    /// δ = I_+(b − h) − s_b for small h > 0, from
    /// (1+1/θ) log(1 + δ/(1+s_b)) − (1/θ) log(1 + δ/s_b) = log(1 − h/b),
    /// whose linear terms cancel exactly.
    pub fn boundary_offset_at_b(&self, h: f64) -> Result<Complex64, ConformalError> {
        if !(h > 0.0 && h < self.b) {
            return Err(ConformalError::DomainError(format!(
                "b - x = {h} is outside (0, b)"
            )));
        }
        let th = self.theta;
        let sb = self.s_b;
        let rhs = (-h / self.b).ln_1p();
        let mut delta = self.seed_near_b(self.b - h) - sb;
        delta.im = (2.0 * h / self.j_second_at_sb()).sqrt();
        let mut prev = f64::INFINITY;
        for _ in 0..60 {
            // the linear parts (1+1/θ)δ/(1+s_b) and δ/(θ s_b) are equal
            let f = (1.0 + 1.0 / th) * ln_1p_minus_u(delta / (1.0 + sb))
                - ln_1p_minus_u(delta / sb) / th
                - rhs;
            let d = (1.0 + 1.0 / th) / (1.0 + sb + delta) - 1.0 / (th * (sb + delta));
            let step = f / d;
            if !step.is_finite() {
                break;
            }
            delta -= step;
            let size = step.norm();
            if size <= NEWTON_TOL * delta.norm() || size < 1e-9 * delta.norm() && size >= 0.5 * prev
            {
                if delta.im > 0.0 {
                    return Ok(delta);
                }
                break;
            }
            prev = size;
        }
        Err(ConformalError::NoConvergence(format!(
            "offset from s_b at b - x = {h:e}"
        )))
    }

    /// dI_+/dx = 1/J'(I_+(x)).
    pub fn boundary_derivative(&self, x: f64) -> Result<Complex64, ConformalError> {
        let s = self.boundary_value(x)?;
        Ok(1.0 / (x * self.log_derivative(s)))
    }

    /// Samples of γ₁ and γ₂ over Chebyshev-clustered x ∈ [0, b], traced by
    /// predictor–corrector continuation from s_b toward −1.
    pub fn trace_gamma(&self, grid_size: usize) -> Result<GammaCurve, ConformalError> {
        if grid_size < 8 {
            return Err(ConformalError::DomainError(
                "grid_size must be at least 8".into(),
            ));
        }
        let n = grid_size;
        let xs: Vec<f64> = (0..=n)
            .map(|j| 0.5 * self.b * (1.0 - (PI * j as f64 / n as f64).cos()))
            .collect();
        let mut ups = vec![c64(0.0, 0.0); n + 1];
        ups[n] = c64(self.s_b, 0.0);
        ups[0] = c64(-1.0, 0.0);
        let mut s = self.seed_near_b(xs[n - 1]);
        s = self
            .newton(c64(xs[n - 1], 0.0), s, 60)
            .ok_or_else(|| ConformalError::NoConvergence("start of trace near s_b".into()))?;
        ups[n - 1] = s;
        let mut x = xs[n - 1];
        for j in (1..n - 1).rev() {
            let target = xs[j];
            while x > target {
                let dist = (s - self.s_b).norm().min((s + 1.0).norm());
                let v = 1.0 / (x * self.log_derivative(s));
                let mut dx = (0.1 * dist / v.norm()).min(x - target);
                loop {
                    let xn = if x - dx <= target { target } else { x - dx };
                    let pred = s + v * (xn - x);
                    let fallback = if xn < 0.02 * self.b {
                        Some(self.seed_near_zero(xn))
                    } else {
                        None
                    };
                    let got = self
                        .newton(c64(xn, 0.0), pred, 40)
                        .filter(|sn| sn.im > 0.0 && (sn - pred).norm() < 0.3 * dist)
                        .or_else(|| {
                            fallback
                                .and_then(|f| self.newton(c64(xn, 0.0), f, 60))
                                .filter(|sn| sn.im > 0.0)
                        });
                    if let Some(sn) = got {
                        s = sn;
                        x = xn;
                        break;
                    }
                    dx *= 0.25;
                    if dx < 1e-15 * self.b {
                        return Err(ConformalError::NoConvergence(format!(
                            "trace stalled at x = {x:.6e}"
                        )));
                    }
                }
            }
            ups[j] = s;
        }
        Ok(GammaCurve {
            samples: xs
                .into_iter()
                .zip(ups)
                .map(|(x, p)| (x, p, p.conj()))
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_values() {
        let m = ConformalMap::new(1.0, 1.0).unwrap();
        assert!((m.eval_j(c64(1.0, 0.0)).unwrap() - 4.0).norm() < 1e-15);
        assert!((m.b - 4.0).abs() < 1e-15);
        let m = ConformalMap::new(2.0, 2.0).unwrap();
        assert!((m.b - 27f64.sqrt()).abs() < 1e-13);
        assert!((m.eval_j(c64(0.5, 0.0)).unwrap().re - m.b).abs() < 1e-13);
        assert!(m.eval_j(c64(-0.5, 0.0)).is_err());
    }

    #[test]
    fn second_derivative_at_sb() {
        for th in [1.0, 2.0, 3.0, 1.5] {
            let m = ConformalMap::new(1.3, th).unwrap();
            let j2 = m.eval_j_second(c64(m.s_b, 0.0)).unwrap();
            assert!((j2.re - m.j_second_at_sb()).abs() < 1e-12 * m.b, "θ={th}");
        }
    }

    #[test]
    fn boundary_values_round_trip() {
        let m = ConformalMap::new(1.0, 1.0).unwrap();
        for i in 1..40 {
            let x = 4.0 * i as f64 / 40.0;
            let s = m.boundary_value(x).unwrap();
            assert!(s.im > 0.0);
            assert!((m.eval_j(s).unwrap() - x).norm() < 1e-12);
            // θ = 1: γ is the unit circle centred at 0 ... |s| = 1
            assert!((s.norm() - 1.0).abs() < 1e-12, "{s}");
        }
    }
}
