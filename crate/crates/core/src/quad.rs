//! Quadrature rules and Chebyshev interpolation.
//!
//! Double precision: Gauss–Legendre, Gauss–Jacobi, tanh-sinh with endpoint
//! distances, adaptive Gauss–Kronrod (7–15) and Chebyshev interpolants on
//! Clenshaw–Curtis points. Multiprecision: tanh-sinh node sets.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rug::Float;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature failed to reach tolerance {tol:e}: {detail}")]
    QuadratureFailure { tol: f64, detail: String },
}

fn failure(tol: f64, detail: impl Into<String>) -> QuadratureError {
    QuadratureError::QuadratureFailure {
        tol,
        detail: detail.into(),
    }
}

/// n-point Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Jacobi rule for the weight (1−x)^a (1+x)^b on [−1, 1], by the
/// Golub–Welsch eigenvalue method.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(a > -1.0 && b > -1.0 && n > 0);
    let mut t = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let diag = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        t[(k, k)] = diag;
        if k + 1 < n {
            let k1 = kf + 1.0;
            let s1 = 2.0 * k1 + a + b;
            let num = 4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b);
            let den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
            let off = (num / den).sqrt();
            t[(k, k + 1)] = off;
            t[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(t);
    let mu0 = 2f64.powf(a + b + 1.0)
        * (crate::specialfn::ln_gamma(Complex64::new(a + 1.0, 0.0))
            + crate::specialfn::ln_gamma(Complex64::new(b + 1.0, 0.0))
            - crate::specialfn::ln_gamma(Complex64::new(a + b + 2.0, 0.0)))
        .exp()
        .re;
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs.into_iter().unzip()
}

/// Nodes and weights on [0, 1] for ∫₀¹ u^α f(u) du.
pub fn gauss_jacobi_unit(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_jacobi(n, 0.0, alpha);
    let scale = 2f64.powf(-alpha - 1.0);
    (
        x.iter().map(|x| 0.5 * (1.0 + x)).collect(),
        w.iter().map(|w| w * scale).collect(),
    )
}

/// A point handed to tanh-sinh integrands: the abscissa and its distances to
/// the two endpoints, which are accurate even where `x` rounds to an endpoint.
#[derive(Clone, Copy, Debug)]
pub struct TsPoint {
    pub x: f64,
    pub from_a: f64,
    pub from_b: f64,
}

/// Tanh-sinh quadrature of a complex integrand on [a, b], refining the step
/// until two levels agree to `tol` (relative to the integral, or absolute
/// when the integral is below 1).
pub fn tanh_sinh(
    f: impl Fn(TsPoint) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Complex64, QuadratureError> {
    let half = 0.5 * (b - a);
    let t_max = 4.5;
    let eval = |t: f64| -> Complex64 {
        let s = 0.5 * PI * t.sinh();
        let ch = s.cosh();
        // 1 − tanh(s) and 1 + tanh(s), computed without cancellation
        let e = (-2.0 * s.abs()).exp();
        let small = 2.0 * e / (1.0 + e);
        let (one_minus, one_plus) = if s >= 0.0 {
            (small, 2.0 - small)
        } else {
            (2.0 - small, small)
        };
        let from_a = half * one_plus;
        let from_b = half * one_minus;
        let x = if s >= 0.0 { b - from_b } else { a + from_a };
        if from_a <= 0.0 || from_b <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let dx = half * 0.5 * PI * t.cosh() / (ch * ch);
        let v = f(TsPoint { x, from_a, from_b });
        if dx == 0.0 || !v.is_finite() && dx < 1e-300 {
            Complex64::new(0.0, 0.0)
        } else {
            v * dx
        }
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut est = sum * h;
    for _level in 0..9 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let next = sum * h;
        if !next.is_finite() {
            return Err(failure(tol, "non-finite integrand value"));
        }
        let diff = (next - est).norm();
        est = next;
        if diff <= tol * est.norm().max(1.0) && h < 0.2 {
            return Ok(est);
        }
    }
    Err(failure(
        tol,
        format!("tanh-sinh levels disagree at {:.3e}", est.norm()),
    ))
}

/// Real-valued convenience wrapper around [`tanh_sinh`].
pub fn tanh_sinh_real(
    f: impl Fn(TsPoint) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, QuadratureError> {
    tanh_sinh(|p| Complex64::new(f(p), 0.0), a, b, tol).map(|v| v.re)
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK_WK[7];
    let mut g = fc * GK_WG[3];
    for i in 0..7 {
        let dx = h * GK_X[i];
        let s = f(c - dx) + f(c + dx);
        k += s * GK_WK[i];
        if i % 2 == 1 {
            g += s * GK_WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Globally adaptive Gauss–Kronrod (7–15) on [a, b].
pub fn gauss_kronrod(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Result<Complex64, QuadratureError> {
    let mut intervals = vec![{
        let (v, e) = gk15(&f, a, b);
        (a, b, v, e)
    }];
    loop {
        let total: Complex64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= tol * total.norm().max(1.0) {
            return Ok(total);
        }
        if intervals.len() >= max_intervals {
            return Err(failure(
                tol,
                format!(
                    "error estimate {err:.3e} after {} intervals",
                    intervals.len()
                ),
            ));
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let m = 0.5 * (lo + hi);
        for (l, h) in [(lo, m), (m, hi)] {
            let (v, e) = gk15(&f, l, h);
            intervals.push((l, h, v, e));
        }
    }
}

pub fn gauss_kronrod_real(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Result<f64, QuadratureError> {
    gauss_kronrod(|x| Complex64::new(f(x), 0.0), a, b, tol, max_intervals).map(|v| v.re)
}

/// Polynomial interpolant through values at the Chebyshev extreme points
/// x_j = mid + half·cos(jπ/N), j = 0..N, evaluated by the barycentric formula.
#[derive(Clone, Debug)]
pub struct Chebyshev {
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl Chebyshev {
    /// The N+1 Chebyshev extreme points on [a, b], in decreasing order.
    pub fn points(a: f64, b: f64, n: usize) -> Vec<f64> {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        (0..=n)
            .map(|j| mid + half * (PI * j as f64 / n as f64).cos())
            .collect()
    }

    pub fn from_values(a: f64, b: f64, values: Vec<f64>) -> Self {
        let n = values.len() - 1;
        Self {
            a,
            b,
            nodes: Self::points(a, b, n),
            values,
        }
    }

    pub fn sample(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let nodes = Self::points(a, b, n);
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self {
            a,
            b,
            nodes,
            values,
        }
    }

    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.degree();
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..=n {
            let d = x - self.nodes[j];
            if d == 0.0 {
                return self.values[j];
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                w *= 0.5;
            }
            let t = w / d;
            num += t * self.values[j];
            den += t;
        }
        num / den
    }

    /// Chebyshev coefficients c_k of Σ c_k T_k((2x − a − b)/(b − a)).
    pub fn coefficients(&self) -> Vec<f64> {
        let n = self.degree();
        (0..=n)
            .map(|k| {
                let mut s = 0.0;
                for j in 0..=n {
                    let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                    s += w * self.values[j] * (PI * (j * k) as f64 / n as f64).cos();
                }
                let scale = if k == 0 || k == n { 1.0 } else { 2.0 };
                scale * s / n as f64
            })
            .collect()
    }

    /// Clenshaw–Curtis integral over [a, b].
    pub fn integral(&self) -> f64 {
        let c = self.coefficients();
        let mut s = 0.0;
        for (k, ck) in c.iter().enumerate() {
            if k % 2 == 0 {
                s += ck * 2.0 / (1.0 - (k * k) as f64);
            }
        }
        0.5 * (self.b - self.a) * s
    }

    /// ∫ of the interpolant over [lo, hi] ⊂ [a, b], from the integrated
    /// Chebyshev series.
    pub fn integral_between(&self, lo: f64, hi: f64) -> f64 {
        let c = self.coefficients();
        let n = c.len();
        let at = |k: usize| if k < n { c[k] } else { 0.0 };
        let mut big = vec![0.0; n + 1];
        big[1] = at(0) - 0.5 * at(2);
        for (k, v) in big.iter_mut().enumerate().skip(2) {
            *v = (at(k - 1) - at(k + 1)) / (2.0 * k as f64);
        }
        let map = |x: f64| (2.0 * x - self.a - self.b) / (self.b - self.a);
        0.5 * (self.b - self.a) * (clenshaw(&big, map(hi)) - clenshaw(&big, map(lo)))
    }

    /// Size of the trailing coefficients relative to the largest one.
    pub fn tail_ratio(&self) -> f64 {
        let c = self.coefficients();
        let max = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let n = c.len();
        let tail = c[n.saturating_sub(3)..]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if max == 0.0 {
            0.0
        } else {
            tail / max
        }
    }
}

fn clenshaw(c: &[f64], s: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * s * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c[0] + s * b1 - b2
}

/// Multiprecision tanh-sinh node set on [0, x_max]: abscissae and weights at
/// a fixed step, precomputed once and reused for many integrands.
pub struct MpTanhSinh {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

impl MpTanhSinh {
    /// Step h = 2^{−level}; the range in t is cut where the weights fall
    /// below 2^{−prec−64}.
    pub fn new(x_max: f64, level: u32, prec: u32) -> Self {
        let h = Float::with_val(prec, 0.5f64.powi(level as i32));
        let half = Float::with_val(prec, x_max / 2.0);
        let pi_half = Float::with_val(prec, rug::float::Constant::Pi) / 2u32;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let floor = -(prec as f64) - 64.0;
        let mut k: i64 = 0;
        loop {
            let t = Float::with_val(prec, &h * k);
            let s = Float::with_val(prec, t.sinh_ref()) * &pi_half;
            let ch = Float::with_val(prec, s.cosh_ref());
            let w = Float::with_val(prec, t.cosh_ref()) * &pi_half
                / Float::with_val(prec, ch.square_ref())
                * &half
                * &h;
            let log2w = crate::specialfn::mp::log2_abs_float(&w).unwrap_or(f64::NEG_INFINITY);
            if log2w < floor || k > 100_000 {
                break;
            }
            // x = half (1 + tanh s); for the negative t branch, half (1 − tanh s) = half·2/(1+e^{2s})
            let e2 = Float::with_val(prec, Float::with_val(prec, &s * 2u32).exp());
            let lower = Float::with_val(prec, &half * 2u32) / Float::with_val(prec, &e2 + 1u32);
            let upper = Float::with_val(prec, &half * 2u32) - &lower;
            if k == 0 {
                nodes.push(upper);
                weights.push(w);
            } else {
                nodes.push(upper);
                weights.push(w.clone());
                nodes.push(lower);
                weights.push(w);
            }
            k += 1;
        }
        Self { nodes, weights }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_weight_moments() {
        // ∫₀¹ u^{−1/2} u² du = 2/5
        let (u, w) = gauss_jacobi_unit(8, -0.5);
        let s: f64 = u.iter().zip(&w).map(|(u, w)| w * u * u).sum();
        assert!((s - 0.4).abs() < 1e-13);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        // ∫₀¹ x^{−1/2} (1−x)^{−1/2} dx = π
        let v = tanh_sinh_real(
            |p| 1.0 / (p.from_a.sqrt() * p.from_b.sqrt()),
            0.0,
            1.0,
            1e-13,
        )
        .unwrap();
        assert!((v - PI).abs() < 1e-12);
    }

    #[test]
    fn kronrod_oscillatory() {
        let v = gauss_kronrod_real(|x| (10.0 * x).cos(), 0.0, 3.0, 1e-13, 200).unwrap();
        assert!((v - (30f64).sin() / 10.0).abs() < 1e-13);
    }

    #[test]
    fn chebyshev_interpolates_and_integrates() {
        let c = Chebyshev::sample(0.0, 2.0, 32, |x| (x * x).exp());
        assert!((c.eval(1.3) - (1.69f64).exp()).abs() < 1e-12);
        // ∫₀² e^{x²} dx
        assert!((c.integral() - 16.452_627_765_507_23).abs() < 1e-10);
        assert!((c.integral_between(0.0, 2.0) - c.integral()).abs() < 1e-12);
        let s = Chebyshev::sample(1.0, 3.0, 24, |x| x.sin());
        let exact = 1.5f64.cos() - 2.5f64.cos();
        assert!((s.integral_between(1.5, 2.5) - exact).abs() < 1e-13);
    }

    #[test]
    fn mp_tanh_sinh_gamma_integral() {
        // ∫₀^60 x^{1/2} e^{−x} dx ≈ Γ(3/2) (tail below 1e−24)
        let prec = 160;
        let r = MpTanhSinh::new(60.0, 6, prec);
        let mut s = Float::new(prec);
        for (x, w) in r.nodes.iter().zip(&r.weights) {
            let v =
                Float::with_val(prec, x.sqrt_ref()) * Float::with_val(prec, (-x.clone()).exp_ref());
            s += v * w;
        }
        let exact = Float::with_val(prec, 1.5).gamma();
        let rel = ((s - &exact) / exact).to_f64().abs();
        assert!(rel < 1e-24, "{rel}");
    }
}
