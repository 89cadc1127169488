//! Meijer G-functions G^{m,0}_{0,q} for the parameter families of the
//! hard-edge problem.
//!
//! All four families have only b-parameters, so
//!
//! ```text
//! G(ζ) = (1/2πi) ∫_L Π_{j≤m} Γ(b_j + u) / Π_{j>m} Γ(1 − b_j − u) · ζ^{−u} du
//! ```
//!
//! and closing L to the left gives a convergent sum of residues at
//! u = −b_h − n. Every function here is therefore ζ^{b_h} times an entire
//! series in ζ for each numerator parameter b_h, which is how values on any
//! sheet of log ζ are produced. The residue series is summed in
//! multiprecision with the precision raised until the observed cancellation is
//! covered, so it is usable at any |ζ|.

use super::gamma::ln_gamma;
use super::mp::{log2_abs, sum_adaptive, to_c64, SeriesSum};
use super::SpecialFnError;
use num_complex::Complex64;
use rug::{Assign, Complex, Float};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which of the Meijer-G shapes to evaluate.
///
/// The "primal" b-list is ((α−θ+1)/θ, …, α/θ, k), the "dual" list is
/// (k, −α/θ, (1−α)/θ, …, (θ−1−α)/θ).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeijerFamily {
    /// G^{θ,0}_{0,θ+1} on the primal list.
    ThetaZero,
    /// G^{θ+1,0}_{0,θ+1} on the primal list.
    ThetaPlusOneZero,
    /// G^{1,0}_{0,θ+1} on the dual list. Entire in ζ.
    OneZero,
    /// G^{θ+1,0}_{0,θ+1} on the dual list.
    ThetaPlusOneZeroDual,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeijerGPattern {
    pub family: MeijerFamily,
    pub theta: u32,
    pub alpha: f64,
    /// Trailing (primal) or leading (dual) integer parameter, 0 ≤ k ≤ θ.
    pub k: u32,
}

/// A parameter of the form (sign·α + offset)/θ, kept exact so that integer
/// differences between parameters can be detected without rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct BParam {
    sign: i64,
    offset: i64,
    theta: i64,
}

impl BParam {
    fn value(&self, alpha: f64) -> f64 {
        (self.sign as f64 * alpha + self.offset as f64) / self.theta as f64
    }

    fn mp(&self, alpha: &Float, prec: u32) -> Float {
        let mut x = Float::with_val(prec, alpha * self.sign);
        x += self.offset;
        x /= self.theta;
        x
    }

    /// `Some(self − other)` when that difference is an integer.
    fn integer_difference(&self, other: &BParam, alpha: f64) -> Option<i64> {
        let ds = self.sign - other.sign;
        let doff = self.offset - other.offset;
        let num = if ds == 0 {
            doff
        } else {
            if alpha.fract() != 0.0 {
                return None;
            }
            ds * alpha as i64 + doff
        };
        (num % self.theta == 0).then(|| num / self.theta)
    }
}

impl MeijerGPattern {
    pub fn new(
        family: MeijerFamily,
        theta: u32,
        alpha: f64,
        k: u32,
    ) -> Result<Self, SpecialFnError> {
        if theta == 0 {
            return Err(SpecialFnError::DomainError(
                "theta must be a positive integer".into(),
            ));
        }
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(SpecialFnError::DomainError(format!(
                "alpha = {alpha} must exceed -1"
            )));
        }
        if k > theta {
            return Err(SpecialFnError::DomainError(format!(
                "k = {k} exceeds theta = {theta}"
            )));
        }
        Ok(Self {
            family,
            theta,
            alpha,
            k,
        })
    }

    fn primal_list(&self) -> Vec<BParam> {
        let t = self.theta as i64;
        let mut v: Vec<BParam> = (1..=t)
            .map(|i| BParam {
                sign: 1,
                offset: i - t,
                theta: t,
            })
            .collect();
        v.push(BParam {
            sign: 0,
            offset: self.k as i64 * t,
            theta: t,
        });
        v
    }

    fn dual_list(&self) -> Vec<BParam> {
        let t = self.theta as i64;
        let mut v = vec![BParam {
            sign: 0,
            offset: self.k as i64 * t,
            theta: t,
        }];
        v.extend((0..t).map(|l| BParam {
            sign: -1,
            offset: l,
            theta: t,
        }));
        v
    }

    /// (numerator parameters, denominator parameters).
    pub(crate) fn split(&self) -> (Vec<BParam>, Vec<BParam>) {
        let t = self.theta as usize;
        match self.family {
            MeijerFamily::ThetaZero => {
                let mut v = self.primal_list();
                let den = v.split_off(t);
                (v, den)
            }
            MeijerFamily::ThetaPlusOneZero => (self.primal_list(), vec![]),
            MeijerFamily::OneZero => {
                let mut v = self.dual_list();
                let den = v.split_off(1);
                (v, den)
            }
            MeijerFamily::ThetaPlusOneZeroDual => (self.dual_list(), vec![]),
        }
    }

    /// (numerator b values, denominator b values) as doubles.
    pub fn b_values(&self) -> (Vec<f64>, Vec<f64>) {
        let (n, d) = self.split();
        (
            n.iter().map(|b| b.value(self.alpha)).collect(),
            d.iter().map(|b| b.value(self.alpha)).collect(),
        )
    }

    /// Two numerator parameters differing by an integer produce double poles
    /// and logarithmic terms, which the residue series does not implement.
    pub fn has_log_collision(&self) -> bool {
        let (num, _) = self.split();
        for i in 0..num.len() {
            for j in (i + 1)..num.len() {
                if num[i].integer_difference(&num[j], self.alpha).is_some() {
                    return true;
                }
            }
        }
        false
    }

    pub fn is_entire(&self) -> bool {
        self.family == MeijerFamily::OneZero
    }

    fn q(&self) -> usize {
        self.theta as usize + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalMethod {
    /// Residue series, or Mellin–Barnes when the series is unavailable.
    Auto,
    ResidueSeries,
    MellinBarnes,
    /// Leading large-ζ term; only for residual tests, never used as a fallback.
    LargeZetaAsymptotic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalStrategy {
    pub method: EvalMethod,
    /// Maximum number of residue terms per pole family.
    pub series_terms: usize,
    /// Maximum |Im u| (vertical line) or |t| (loop) for the contour; 0 means
    /// chosen from the decay of the integrand.
    pub mb_truncation: f64,
    /// Maximum number of quadrature nodes for the contour integral.
    pub mb_nodes: usize,
    /// Double-precision summation is attempted only for |ζ| ≤ switch_radius.
    pub switch_radius: f64,
    pub tolerance: f64,
}

impl Default for EvalStrategy {
    fn default() -> Self {
        Self {
            method: EvalMethod::Auto,
            series_terms: 50_000,
            mb_truncation: 0.0,
            mb_nodes: 400_000,
            switch_radius: 8.0,
            tolerance: 1e-12,
        }
    }
}

impl EvalStrategy {
    pub fn with_method(method: EvalMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }
}

/// G(ζ) on the principal sheet.
pub fn meijer_g(
    pattern: &MeijerGPattern,
    zeta: Complex64,
    strategy: &EvalStrategy,
) -> Result<Complex64, SpecialFnError> {
    if zeta == Complex64::new(0.0, 0.0) {
        if pattern.is_entire() {
            return value_at_zero(pattern);
        }
        return Err(SpecialFnError::DomainError(
            "zeta = 0 is a branch point".into(),
        ));
    }
    if !pattern.is_entire() && zeta.im == 0.0 && zeta.re < 0.0 {
        return Err(SpecialFnError::DomainError(
            "zeta lies on the cut (-inf, 0]".into(),
        ));
    }
    meijer_g_on_sheet(pattern, zeta.ln(), strategy)
}

/// G at the point of the logarithmic Riemann surface with log ζ = `ln_zeta`.
pub fn meijer_g_on_sheet(
    pattern: &MeijerGPattern,
    ln_zeta: Complex64,
    strategy: &EvalStrategy,
) -> Result<Complex64, SpecialFnError> {
    meijer_g_scaled(pattern, ln_zeta, 0.0, strategy)
}

/// e^{λ log ζ} · G(ζ) on the sheet fixed by `ln_zeta`.
///
/// Folding the power prefactor into the series keeps functions such as
/// ζ^{−b_1} G(ζ) free of spurious branch behaviour.
pub fn meijer_g_scaled(
    pattern: &MeijerGPattern,
    ln_zeta: Complex64,
    lambda: f64,
    strategy: &EvalStrategy,
) -> Result<Complex64, SpecialFnError> {
    if !(ln_zeta.re.is_finite() && ln_zeta.im.is_finite()) {
        return Err(SpecialFnError::DomainError(format!(
            "log zeta = {ln_zeta} is not finite"
        )));
    }
    match strategy.method {
        EvalMethod::Auto => {
            if pattern.has_log_collision() {
                Ok(mellin_barnes(pattern, ln_zeta, strategy)? * (lambda * ln_zeta).exp())
            } else {
                residue_series(pattern, ln_zeta, lambda, strategy)
            }
        }
        EvalMethod::ResidueSeries => {
            if pattern.has_log_collision() {
                return Err(SpecialFnError::DomainError(
                    "integer alpha gives double poles; use the Mellin-Barnes method".into(),
                ));
            }
            residue_series(pattern, ln_zeta, lambda, strategy)
        }
        EvalMethod::MellinBarnes => {
            Ok(mellin_barnes(pattern, ln_zeta, strategy)? * (lambda * ln_zeta).exp())
        }
        EvalMethod::LargeZetaAsymptotic => {
            Ok(large_zeta_leading(pattern, ln_zeta)? * (lambda * ln_zeta).exp())
        }
    }
}

/// ψ_k(w) = w^{−(α+1−θ)} G^{θ,0}_{0,θ+1}(w^θ) on the primal list with
/// trailing parameter k. Entire in w.
pub fn psi_k(
    theta: u32,
    alpha: f64,
    k: u32,
    w: Complex64,
    strategy: &EvalStrategy,
) -> Result<Complex64, SpecialFnError> {
    let pattern = MeijerGPattern::new(MeijerFamily::ThetaZero, theta, alpha, k)?;
    if w == Complex64::new(0.0, 0.0) {
        // Only the lowest pole family at n = 0 survives: w^{h−1+θn} with h = 1.
        let (num, den) = pattern.split();
        let b1 = num[0];
        let n0 = start_index(&b1, &den, alpha);
        if n0 > 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let others: Vec<f64> = num[1..]
            .iter()
            .map(|b| b.value(alpha) - b1.value(alpha))
            .collect();
        let dens: Vec<f64> = den
            .iter()
            .map(|b| 1.0 - b.value(alpha) + b1.value(alpha))
            .collect();
        return Ok(Complex64::new(real_gamma_ratio(&others, &dens), 0.0));
    }
    let th = theta as f64;
    meijer_g_scaled(&pattern, th * w.ln(), -(alpha + 1.0 - th) / th, strategy)
}

/// Relative residual of G^{θ+1,0}(ζe^{−πi}) − G^{θ+1,0}(ζe^{πi}) = (−1)^k 2πi G^{θ,0}(ζ)
/// on the primal list.
pub fn meijer_jump_identity_residual(
    theta: u32,
    alpha: f64,
    k: u32,
    zeta: Complex64,
    strategy: &EvalStrategy,
) -> Result<f64, SpecialFnError> {
    if zeta.im == 0.0 && zeta.re <= 0.0 {
        return Err(SpecialFnError::DomainError(
            "zeta must be off (-inf, 0]".into(),
        ));
    }
    let big = MeijerGPattern::new(MeijerFamily::ThetaPlusOneZero, theta, alpha, k)?;
    let small = MeijerGPattern::new(MeijerFamily::ThetaZero, theta, alpha, k)?;
    let l = zeta.ln();
    let ipi = Complex64::new(0.0, PI);
    let a = meijer_g_on_sheet(&big, l - ipi, strategy)?;
    let b = meijer_g_on_sheet(&big, l + ipi, strategy)?;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let c = sign * Complex64::new(0.0, 2.0 * PI) * meijer_g_on_sheet(&small, l, strategy)?;
    let scale = a.norm().max(b.norm()).max(c.norm());
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((a - b - c).norm() / scale)
}

fn value_at_zero(pattern: &MeijerGPattern) -> Result<Complex64, SpecialFnError> {
    // Entire case: ζ^{k+n}; only k = 0, n = 0 survives.
    let (num, den) = pattern.split();
    let b = num[0];
    if pattern.k != 0 || start_index(&b, &den, pattern.alpha) > 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let dens: Vec<f64> = den
        .iter()
        .map(|d| 1.0 - d.value(pattern.alpha) + b.value(pattern.alpha))
        .collect();
    Ok(Complex64::new(real_gamma_ratio(&[], &dens), 0.0))
}

/// Π Γ(num_i) / Π Γ(den_j) for real arguments; zero if a denominator argument
/// is a pole.
fn real_gamma_ratio(num: &[f64], den: &[f64]) -> f64 {
    let prec = 128;
    let mut r = Float::with_val(prec, 1);
    for &x in num {
        r *= Float::with_val(prec, x).gamma();
    }
    for &x in den {
        if x <= 0.0 && x.fract() == 0.0 {
            return 0.0;
        }
        r /= Float::with_val(prec, x).gamma();
    }
    r.to_f64()
}

/// First n for which the residue at u = −b_h − n is nonzero: a denominator
/// 1/Γ(1 − b_j + b_h + n) vanishes while its argument is a non-positive integer.
fn start_index(bh: &BParam, den: &[BParam], alpha: f64) -> u64 {
    let mut n0 = 0i64;
    for d in den {
        if let Some(diff) = bh.integer_difference(d, alpha) {
            // argument 1 + diff + n must be ≥ 1
            n0 = n0.max(-diff);
        }
    }
    n0 as u64
}

struct GroupPlan {
    bh: BParam,
    n0: u64,
}

fn plan(pattern: &MeijerGPattern) -> (Vec<GroupPlan>, Vec<BParam>, Vec<BParam>) {
    let (num, den) = pattern.split();
    let groups = num
        .iter()
        .map(|bh| GroupPlan {
            bh: *bh,
            n0: start_index(bh, &den, pattern.alpha),
        })
        .collect();
    (groups, num, den)
}

fn residue_series(
    pattern: &MeijerGPattern,
    ln_zeta: Complex64,
    lambda: f64,
    strategy: &EvalStrategy,
) -> Result<Complex64, SpecialFnError> {
    let (groups, num, den) = plan(pattern);
    let alpha = pattern.alpha;
    let abs_zeta_ln = ln_zeta.re;

    // Double-precision pass: magnitude profile, and the value itself when
    // cancellation is mild.
    let z = ln_zeta.exp();
    let mut peak_ln = f64::NEG_INFINITY;
    let mut total = Complex64::new(0.0, 0.0);
    let mut fast_ok = abs_zeta_ln.exp() <= strategy.switch_radius;
    for g in &groups {
        let bh = g.bh.value(alpha);
        let n0 = g.n0 as f64;
        let d: Vec<f64> = num
            .iter()
            .filter(|b| **b != g.bh)
            .map(|b| b.value(alpha) - bh)
            .collect();
        let e: Vec<f64> = den.iter().map(|b| 1.0 - b.value(alpha) + bh).collect();
        let mut lc = -ln_gamma(Complex64::new(n0 + 1.0, 0.0));
        for &x in &d {
            lc += ln_gamma(Complex64::new(x - n0, 0.0));
        }
        for &x in &e {
            lc -= ln_gamma(Complex64::new(x + n0, 0.0));
        }
        if g.n0 % 2 == 1 {
            lc += Complex64::new(0.0, PI);
        }
        let mut term = (lc + (bh + lambda + n0) * ln_zeta).exp();
        let mut log_mag = lc.re + ((bh + lambda + n0) * ln_zeta).re;
        let mut group_peak = log_mag;
        let mut n = g.n0;
        let mut quiet = 0;
        loop {
            if term.is_finite() {
                total += term;
            } else {
                fast_ok = false;
            }
            let nf = n as f64;
            let mut den_prod = nf + 1.0;
            for &x in &d {
                den_prod *= x - nf - 1.0;
            }
            for &x in &e {
                den_prod *= x + nf;
            }
            let ratio_ln = abs_zeta_ln - den_prod.abs().ln();
            log_mag += ratio_ln;
            term *= -z / den_prod;
            group_peak = group_peak.max(log_mag);
            n += 1;
            if ratio_ln < 0.0 && log_mag < group_peak - 60.0 {
                quiet += 1;
                if quiet >= 10 {
                    break;
                }
            } else {
                quiet = 0;
            }
            if (n - g.n0) as usize > strategy.series_terms {
                return Err(SpecialFnError::NonConvergence {
                    what: "residue series",
                    detail: format!(
                        "more than {} terms at |zeta| = {:.3e}",
                        strategy.series_terms,
                        abs_zeta_ln.exp()
                    ),
                });
            }
        }
        peak_ln = peak_ln.max(group_peak);
    }
    let peak_log2 = peak_ln / std::f64::consts::LN_2;
    if fast_ok && total.is_finite() && total.norm() > 0.0 {
        let loss = peak_log2 - total.norm().log2();
        if loss < 8.0 {
            return Ok(total);
        }
    }

    let target = (-strategy.tolerance.log2()).ceil().max(53.0) as u32 + 8;
    let observed_loss = if total.norm() > 0.0 {
        peak_log2 - total.norm().log2()
    } else {
        64.0
    };
    let initial = target + 64 + observed_loss.clamp(0.0, 4096.0) as u32;
    let (value, _) = sum_adaptive(
        initial,
        target,
        |prec| {
            residue_series_mp(
                pattern,
                &groups,
                &num,
                &den,
                ln_zeta,
                lambda,
                prec,
                strategy.series_terms,
            )
        },
        |prec, loss| SpecialFnError::NonConvergence {
            what: "residue series",
            detail: format!("cancellation {loss:.0} bits not covered at {prec} bits"),
        },
    )?;
    Ok(to_c64(&value))
}

#[allow(clippy::too_many_arguments)]
fn residue_series_mp(
    pattern: &MeijerGPattern,
    groups: &[GroupPlan],
    num: &[BParam],
    den: &[BParam],
    ln_zeta: Complex64,
    lambda: f64,
    prec: u32,
    max_terms: usize,
) -> Result<SeriesSum, SpecialFnError> {
    let alpha = Float::with_val(prec, pattern.alpha);
    let lz = Complex::with_val(prec, (ln_zeta.re, ln_zeta.im));
    let z = Complex::with_val(prec, lz.exp_ref());
    let mut total = Complex::new(prec);
    let mut peak = f64::NEG_INFINITY;
    for g in groups {
        let bh = g.bh.mp(&alpha, prec);
        let d: Vec<Float> = num
            .iter()
            .filter(|b| **b != g.bh)
            .map(|b| Float::with_val(prec, b.mp(&alpha, prec) - &bh))
            .collect();
        let e: Vec<Float> = den
            .iter()
            .map(|b| {
                let mut x = Float::with_val(prec, 1);
                x -= b.mp(&alpha, prec);
                x += &bh;
                x
            })
            .collect();
        let n0 = g.n0;
        let mut c = Float::with_val(prec, n0 + 1).gamma().recip();
        if n0 % 2 == 1 {
            c = -c;
        }
        for x in &d {
            c *= Float::with_val(prec, x - n0).gamma();
        }
        for x in &e {
            c /= Float::with_val(prec, x + n0).gamma();
        }
        let mut expo = Float::with_val(prec, &bh + lambda);
        expo += n0;
        let mut term = Complex::with_val(prec, &lz * &expo);
        term.exp_mut();
        term *= &c;
        let mut group_peak = log2_abs(&term).unwrap_or(f64::NEG_INFINITY);
        let mut n = n0;
        let mut quiet = 0;
        let mut den_prod = Float::new(prec);
        let mut tmp = Float::new(prec);
        let log2_z = ln_zeta.re / std::f64::consts::LN_2;
        loop {
            total += &term;
            den_prod.assign(n + 1);
            for x in &d {
                tmp.assign(x - (n + 1));
                den_prod *= &tmp;
            }
            for x in &e {
                tmp.assign(x + n);
                den_prod *= &tmp;
            }
            term *= &z;
            term /= &den_prod;
            term = -term;
            n += 1;
            let mag = log2_abs(&term).unwrap_or(f64::NEG_INFINITY);
            group_peak = group_peak.max(mag);
            let shrinking = log2_z < log2_abs_f(&den_prod);
            if shrinking && mag < group_peak - prec as f64 - 4.0 {
                quiet += 1;
                if quiet >= 10 {
                    break;
                }
            } else {
                quiet = 0;
            }
            if (n - n0) as usize > max_terms {
                return Err(SpecialFnError::NonConvergence {
                    what: "residue series",
                    detail: format!("more than {max_terms} terms at {prec} bits"),
                });
            }
        }
        peak = peak.max(group_peak);
    }
    Ok(SeriesSum {
        value: total,
        peak_log2: peak,
    })
}

fn log2_abs_f(x: &Float) -> f64 {
    super::mp::log2_abs_float(x).unwrap_or(f64::NEG_INFINITY)
}

/// Mellin–Barnes quadrature of the defining contour integral.
///
/// The contour is the parabola u(t) = σ − a t² + i t, which keeps every pole
/// u = −b_h − n on its left and runs off to Re u = −∞ where the integrand
/// decays factorially; a = 0 is the vertical line, admissible for
/// all-numerator families inside their sector of absolute convergence.
/// (σ, a) are picked from a small grid to minimise ∫|f| |du|, which keeps the
/// cancellation in the double-precision sum small.
pub fn mellin_barnes(
    pattern: &MeijerGPattern,
    ln_zeta: Complex64,
    strategy: &EvalStrategy,
) -> Result<Complex64, SpecialFnError> {
    let (num, den) = pattern.b_values();
    let q = pattern.q() as f64;
    let rightmost = num.iter().map(|b| -b).fold(f64::NEG_INFINITY, f64::max);
    let integrand = |u: Complex64| -> Complex64 {
        let mut s = -u * ln_zeta;
        for &b in &num {
            s += ln_gamma(u + b);
        }
        for &b in &den {
            s -= ln_gamma(1.0 - b - u);
        }
        s.exp()
    };
    let on_contour = |sigma: f64, a: f64, t: f64| {
        let u = Complex64::new(sigma - a * t * t, t);
        integrand(u) * Complex64::new(-2.0 * a * t, 1.0)
    };
    let margin = q * PI / 2.0 - ln_zeta.im.abs();
    let vertical_ok = den.is_empty() && margin > 0.5;
    let base = rightmost + 0.25;
    let saddle = (ln_zeta / q).exp().re;
    let mut sigmas: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|d| base + d)
        .collect();
    if saddle > base {
        sigmas.push(saddle);
    }
    let mut slopes = vec![0.02, 0.05, 0.1, 0.2, 0.4, 0.8];
    if vertical_ok {
        slopes.push(0.0);
    }
    let mut best = (f64::INFINITY, base, 0.1);
    for &sigma in &sigmas {
        for &a in &slopes {
            let mass = coarse_mass(|t| on_contour(sigma, a, t));
            if mass < best.0 {
                best = (mass, sigma, a);
            }
        }
    }
    let (_, sigma, a) = best;
    Ok(trapezoid_line(|t| on_contour(sigma, a, t), strategy)? / Complex64::new(0.0, 2.0 * PI))
}

/// ∫|g| on a step-1/4 grid, walking out until the integrand is negligible.
fn coarse_mass(g: impl Fn(f64) -> Complex64) -> f64 {
    let h = 0.25;
    let mut total = g(0.0).norm();
    let mut peak = total;
    for dir in [1.0, -1.0] {
        let mut quiet = 0;
        for k in 1..40_000 {
            let v = g(dir * k as f64 * h).norm();
            if !v.is_finite() {
                if peak > 0.0 && v.is_nan() {
                    break;
                }
                return f64::INFINITY;
            }
            total += v;
            peak = peak.max(v);
            if v < 1e-20 * peak {
                quiet += 1;
                if quiet > 4 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
    }
    total * h
}

/// Trapezoid rule on the real line for a rapidly decaying analytic integrand,
/// halving the step until successive estimates agree.
fn trapezoid_line(
    f: impl Fn(f64) -> Complex64,
    strategy: &EvalStrategy,
) -> Result<Complex64, SpecialFnError> {
    let tol = strategy.tolerance;
    let t_cap = if strategy.mb_truncation > 0.0 {
        strategy.mb_truncation
    } else {
        1e4
    };
    let mut h = 0.25;
    // Sum over nodes t = offset + k h, walking outward until the tail is negligible.
    let sweep = |h: f64, offset: f64, nodes: &mut usize| -> (Complex64, f64, bool) {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut abs_sum = 0.0;
        let mut peak: f64 = 0.0;
        let mut truncated_cleanly = true;
        for dir in [1.0, -1.0] {
            let mut k = 0.0;
            let mut quiet = 0;
            loop {
                let t = dir * (offset + k * h);
                if offset == 0.0 && dir < 0.0 && k == 0.0 {
                    k += 1.0;
                    continue;
                }
                if t.abs() > t_cap {
                    truncated_cleanly = false;
                    break;
                }
                let v = f(t);
                *nodes += 1;
                if v.is_finite() {
                    sum += v;
                    abs_sum += v.norm();
                    peak = peak.max(v.norm());
                    if v.norm() < 1e-20 * peak {
                        quiet += 1;
                        if quiet > 8 {
                            break;
                        }
                    } else {
                        quiet = 0;
                    }
                } else if peak > 0.0 {
                    // Underflowed far out on the contour.
                    quiet += 1;
                    if quiet > 8 {
                        break;
                    }
                }
                k += 1.0;
            }
        }
        (sum * h, abs_sum * h, truncated_cleanly)
    };
    let mut nodes = 0usize;
    let (mut est, mut abs_est, mut clean) = sweep(h, 0.0, &mut nodes);
    loop {
        let (mid, mid_abs, c2) = sweep(h, h / 2.0, &mut nodes);
        let refined = 0.5 * (est + mid);
        let refined_abs = 0.5 * (abs_est + mid_abs);
        clean = clean && c2;
        h /= 2.0;
        let diff = (refined - est).norm();
        est = refined;
        abs_est = refined_abs;
        let scale = est.norm();
        let rounding = 1e-15 * abs_est;
        if diff <= tol * scale.max(1e-300) || (diff <= 4.0 * rounding && h < 0.05) {
            if rounding > tol.max(1e-10) * scale {
                return Err(SpecialFnError::NonConvergence {
                    what: "Mellin-Barnes quadrature",
                    detail: format!(
                        "cancellation: |integral| = {scale:.3e} against ∫|f| = {abs_est:.3e}"
                    ),
                });
            }
            if !clean {
                return Err(SpecialFnError::NonConvergence {
                    what: "Mellin-Barnes quadrature",
                    detail: format!("integrand not negligible at truncation {t_cap}"),
                });
            }
            return Ok(est);
        }
        if nodes > strategy.mb_nodes {
            return Err(SpecialFnError::NonConvergence {
                what: "Mellin-Barnes quadrature",
                detail: format!(
                    "{nodes} nodes without reaching tolerance (last change {diff:.3e})"
                ),
            });
        }
    }
}

/// Leading large-ζ behaviour of G^{q,0}_{0,q}:
/// (2π)^{(q−1)/2} q^{−1/2} ζ^ϑ exp(−q ζ^{1/q}), ϑ = (Σb − (q−1)/2)/q.
fn large_zeta_leading(
    pattern: &MeijerGPattern,
    ln_zeta: Complex64,
) -> Result<Complex64, SpecialFnError> {
    let (num, den) = pattern.b_values();
    if !den.is_empty() {
        return Err(SpecialFnError::Unsupported(
            "large-zeta leading term is implemented for the all-numerator families only".into(),
        ));
    }
    let q = num.len() as f64;
    let vartheta = (num.iter().sum::<f64>() - (q - 1.0) / 2.0) / q;
    let pref = (2.0 * PI).powf((q - 1.0) / 2.0) / q.sqrt();
    Ok(pref * (vartheta * ln_zeta - q * (ln_zeta / q).exp()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_and_lists() {
        let p = MeijerGPattern::new(MeijerFamily::ThetaZero, 2, 0.5, 1).unwrap();
        let (n, d) = p.b_values();
        assert_eq!(n, vec![-0.25, 0.25]);
        assert_eq!(d, vec![1.0]);
        let p = MeijerGPattern::new(MeijerFamily::OneZero, 2, 0.5, 0).unwrap();
        let (n, d) = p.b_values();
        assert_eq!(n, vec![0.0]);
        assert_eq!(d, vec![-0.25, 0.25]);
    }

    #[test]
    fn collision_detection() {
        let p = MeijerGPattern::new(MeijerFamily::ThetaPlusOneZero, 2, 1.0, 0).unwrap();
        // b = (0, 1/2, 0): collision
        assert!(p.has_log_collision());
        let p = MeijerGPattern::new(MeijerFamily::ThetaPlusOneZero, 2, 0.5, 0).unwrap();
        assert!(!p.has_log_collision());
        let p = MeijerGPattern::new(MeijerFamily::ThetaZero, 3, 2.0, 1).unwrap();
        assert!(!p.has_log_collision());
    }

    #[test]
    fn bessel_j0_at_one() {
        let p = MeijerGPattern::new(MeijerFamily::OneZero, 1, 0.0, 0).unwrap();
        let v = meijer_g(&p, Complex64::new(1.0, 0.0), &EvalStrategy::default()).unwrap();
        assert!((v.re - 0.223_890_779_141_235_67).abs() < 1e-14);
    }

    #[test]
    fn series_and_quadrature_agree_on_simple_case() {
        let p = MeijerGPattern::new(MeijerFamily::ThetaPlusOneZero, 1, 0.3, 0).unwrap();
        let z = Complex64::new(1.5, 0.7);
        let a = meijer_g(&p, z, &EvalStrategy::with_method(EvalMethod::ResidueSeries)).unwrap();
        let b = meijer_g(&p, z, &EvalStrategy::with_method(EvalMethod::MellinBarnes)).unwrap();
        assert!((a - b).norm() < 1e-11 * a.norm(), "{a} vs {b}");
    }
}
