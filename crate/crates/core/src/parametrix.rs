//! Model Riemann–Hilbert parametrices: the Meijer-G parametrices Ψ (for p_n)
//! and Ψ̃ (for q_n) at the hard edge, the Airy parametrix, and the scalar
//! global parametrices built on the map J_c.
//!
//! Matrix entries are evaluated on demand from the special functions; the
//! checkers compare one-sided boundary values across each jump ray, the
//! determinant against its closed form, and the large-ζ behaviour against the
//! leading term with its decay exponent.

use crate::conformal_map::{ConformalError, ConformalMap};
use crate::specialfn::{
    airy, meijer_g, meijer_g_on_sheet, meijer_g_scaled, psi_k, EvalStrategy, MeijerFamily,
    MeijerGPattern, SpecialFnError,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParametrixError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
    #[error(transparent)]
    Conformal(#[from] ConformalError),
}

type Result<T> = std::result::Result<T, ParametrixError>;

pub type CMatrix = DMatrix<Complex64>;

/// Distance from a jump ray at which one-sided values are sampled.
pub const ONE_SIDED_DISTANCE: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParametrixKind {
    MeiP,
    MeiQ,
    Airy,
    GlobalP,
    GlobalQ,
}

impl ParametrixKind {
    pub fn name(&self) -> &'static str {
        match self {
            ParametrixKind::MeiP => "MeiP",
            ParametrixKind::MeiQ => "MeiQ",
            ParametrixKind::Airy => "Airy",
            ParametrixKind::GlobalP => "GlobalP",
            ParametrixKind::GlobalQ => "GlobalQ",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfPlane {
    Upper,
    Lower,
}

impl HalfPlane {
    /// The half-plane of ζ; points on the real axis have none.
    pub fn of(zeta: Complex64) -> Result<Self> {
        if zeta.im > 0.0 {
            Ok(HalfPlane::Upper)
        } else if zeta.im < 0.0 {
            Ok(HalfPlane::Lower)
        } else {
            Err(ParametrixError::Domain(format!(
                "zeta = {zeta} is on the real axis"
            )))
        }
    }
}

/// A jump ray {r e^{i angle}: r > 0}. `outward` rays are oriented away from
/// the origin; the + side lies to the left of the orientation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpRay {
    pub angle: f64,
    pub outward: bool,
}

impl JumpRay {
    fn direction(&self) -> Complex64 {
        let d = Complex64::from_polar(1.0, self.angle);
        if self.outward {
            d
        } else {
            -d
        }
    }

    /// Unit normal pointing into the + side.
    pub fn plus_normal(&self) -> Complex64 {
        Complex64::i() * self.direction()
    }
}

// Orientations of the hard-edge contour ℝ ∪ iℝ. The positive real axis and
// the imaginary axis point away from 0 and the negative real axis toward 0,
// so ℝ runs left to right and iℝ runs up on the upper half and down on the
// lower half.
const MEI_RAYS: [JumpRay; 4] = [
    JumpRay {
        angle: 0.0,
        outward: true,
    },
    JumpRay {
        angle: PI / 2.0,
        outward: true,
    },
    JumpRay {
        angle: PI,
        outward: false,
    },
    JumpRay {
        angle: -PI / 2.0,
        outward: true,
    },
];

const AIRY_RAYS: [JumpRay; 4] = [
    JumpRay {
        angle: 0.0,
        outward: true,
    },
    JumpRay {
        angle: 2.0 * PI / 3.0,
        outward: false,
    },
    JumpRay {
        angle: PI,
        outward: false,
    },
    JumpRay {
        angle: -2.0 * PI / 3.0,
        outward: false,
    },
];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sign(k: u32) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// e^{iπt}.
fn cis_pi(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, PI * t)
}

/// Principal ζ^p.
fn cpow(zeta: Complex64, p: f64) -> Complex64 {
    (p * zeta.ln()).exp()
}

/// Log with imaginary part reduced to (−π, π].
fn principal_log(re: f64, im: f64) -> Complex64 {
    let two_pi = 2.0 * PI;
    let mut t = im.rem_euclid(two_pi);
    if t > PI {
        t -= two_pi;
    }
    c(re, t)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// The (θ+1)×(θ+1) cyclic matrix I₁ ⊕ C, C the θ×θ cyclic shift with a 1 in
/// its top-right corner.
pub fn m_cyc(theta: u32) -> CMatrix {
    let d = theta as usize + 1;
    let mut m = CMatrix::zeros(d, d);
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, d - 1)] = c(1.0, 0.0);
    for i in 2..d {
        m[(i, i - 1)] = c(1.0, 0.0);
    }
    m
}

/// Inverse of [`m_cyc`]; it is a permutation matrix, so this is its transpose.
pub fn m_cyc_inverse(theta: u32) -> CMatrix {
    m_cyc(theta).transpose()
}

/// Υ(ζ) = diag(e^{−kπi/(θ+1)} ζ^{k/(θ+1)}), k = 0..θ.
pub fn upsilon(theta: u32, zeta: Complex64) -> CMatrix {
    let d = theta as usize + 1;
    let t1 = theta as f64 + 1.0;
    CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            cis_pi(-(i as f64) / t1) * cpow(zeta, i as f64 / t1)
        } else {
            c(0.0, 0.0)
        }
    })
}

/// Diagonal of Λ(ζ): (θ+1) ζ^{1/(θ+1)} times (e^{∓πi/(θ+1)}, e^{±πi/(θ+1)},
/// e^{(2j−1)πi/(θ+1)} for j = 2..θ), upper signs in the upper half-plane.
pub fn lambda(theta: u32, zeta: Complex64, half: HalfPlane) -> Vec<Complex64> {
    let t1 = theta as f64 + 1.0;
    let s = t1 * cpow(zeta, 1.0 / t1);
    let e = match half {
        HalfPlane::Upper => 1.0,
        HalfPlane::Lower => -1.0,
    };
    let mut v = vec![s * cis_pi(-e / t1), s * cis_pi(e / t1)];
    for j in 2..=theta {
        v.push(s * cis_pi((2 * j - 1) as f64 / t1));
    }
    v
}

/// Diagonal of Ξ(ζ) for Ψ.
pub fn xi(theta: u32, alpha: f64, zeta: Complex64, half: HalfPlane) -> Vec<Complex64> {
    let th = theta as f64;
    let e = (alpha + 1.5) / (th + 1.0) - (alpha + 1.0) / th;
    let z = cpow(zeta, (alpha + 1.0 - th) / th);
    let mut v = match half {
        HalfPlane::Upper => vec![-cis_pi(-2.0 * (alpha + 1.0) / th) * z / th, cis_pi(2.0 * e)],
        HalfPlane::Lower => vec![
            -cis_pi(2.0 * e) * z / th,
            -cis_pi(-2.0 * (alpha + 1.0) / th),
        ],
    };
    for j in 2..=theta {
        v.push(cis_pi(2.0 * j as f64 * e));
    }
    v
}

/// Diagonal of Ξ̃(ζ) for Ψ̃.
pub fn xi_tilde(theta: u32, alpha: f64, zeta: Complex64, half: HalfPlane) -> Vec<Complex64> {
    let th = theta as f64;
    let e = alpha / th - (alpha + 0.5) / (th + 1.0);
    let z = cpow(zeta, -alpha / th);
    let mut v = match half {
        HalfPlane::Upper => vec![cis_pi(2.0 * alpha / th) * z, cis_pi(2.0 * e)],
        HalfPlane::Lower => vec![cis_pi(2.0 * e) * z, -cis_pi(2.0 * alpha / th)],
    };
    for j in 2..=theta {
        v.push(cis_pi(2.0 * j as f64 * e));
    }
    v
}

/// Ω₊ = (e^{2kjπi/(θ+1)}) and Ω₋ = Ω₊ (σ₁ ⊕ I).
pub fn omega(theta: u32, half: HalfPlane) -> CMatrix {
    let d = theta as usize + 1;
    let t1 = theta as f64 + 1.0;
    let plus = CMatrix::from_fn(d, d, |k, j| cis_pi(2.0 * (k * j) as f64 / t1));
    match half {
        HalfPlane::Upper => plus,
        HalfPlane::Lower => {
            let mut m = plus;
            m.swap_columns(0, 1);
            m
        }
    }
}

/// det Ω₊ = d^{d/2} e^{(2+7d−d²)πi/4}, d = θ+1; det Ω₋ = −det Ω₊.
pub fn omega_determinant(theta: u32, half: HalfPlane) -> Complex64 {
    let d = theta as f64 + 1.0;
    let v = d.powf(d / 2.0) * cis_pi((2.0 + 7.0 * d - d * d) / 4.0);
    match half {
        HalfPlane::Upper => v,
        HalfPlane::Lower => -v,
    }
}

/// A model parametrix. Mei kinds are (θ+1)×(θ+1), Airy is 2×2 and the global
/// kinds are the 1×2 row (first, second component).
#[derive(Clone, Debug)]
pub struct ParametrixMatrix {
    pub kind: ParametrixKind,
    pub theta: u32,
    pub alpha: f64,
    pub strategy: EvalStrategy,
    global: Option<GlobalParametrix>,
}

fn check_params(theta: u32, alpha: f64) -> Result<()> {
    if theta == 0 {
        return Err(ParametrixError::Domain(
            "theta must be a positive integer".into(),
        ));
    }
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(ParametrixError::Domain(format!(
            "alpha = {alpha} must exceed -1"
        )));
    }
    Ok(())
}

pub fn build_mei_p(theta: u32, alpha: f64) -> Result<ParametrixMatrix> {
    check_params(theta, alpha)?;
    Ok(ParametrixMatrix {
        kind: ParametrixKind::MeiP,
        theta,
        alpha,
        strategy: EvalStrategy::default(),
        global: None,
    })
}

pub fn build_mei_q(theta: u32, alpha: f64) -> Result<ParametrixMatrix> {
    check_params(theta, alpha)?;
    Ok(ParametrixMatrix {
        kind: ParametrixKind::MeiQ,
        theta,
        alpha,
        strategy: EvalStrategy::default(),
        global: None,
    })
}

pub fn build_airy() -> ParametrixMatrix {
    ParametrixMatrix {
        kind: ParametrixKind::Airy,
        theta: 1,
        alpha: 0.0,
        strategy: EvalStrategy::default(),
        global: None,
    }
}

impl ParametrixMatrix {
    pub fn with_strategy(mut self, strategy: EvalStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn from_global(global: GlobalParametrix) -> Self {
        Self {
            kind: global.kind,
            theta: global.theta,
            alpha: global.alpha,
            strategy: EvalStrategy::default(),
            global: Some(global),
        }
    }

    pub fn global(&self) -> Option<&GlobalParametrix> {
        self.global.as_ref()
    }

    pub fn shape(&self) -> (usize, usize) {
        let d = self.theta as usize + 1;
        match self.kind {
            ParametrixKind::MeiP | ParametrixKind::MeiQ => (d, d),
            ParametrixKind::Airy => (2, 2),
            ParametrixKind::GlobalP | ParametrixKind::GlobalQ => (1, 2),
        }
    }

    /// Rays of the jump contour; empty for the global kinds, whose jump is on (0, b).
    pub fn jump_rays(&self) -> Vec<JumpRay> {
        match self.kind {
            ParametrixKind::MeiP | ParametrixKind::MeiQ => MEI_RAYS.to_vec(),
            ParametrixKind::Airy => AIRY_RAYS.to_vec(),
            _ => vec![],
        }
    }

    fn on_contour(&self, zeta: Complex64) -> bool {
        if zeta == c(0.0, 0.0) {
            return true;
        }
        let a = zeta.arg();
        self.jump_rays().iter().any(|r| {
            let d = (a - r.angle).rem_euclid(2.0 * PI);
            d.min(2.0 * PI - d) == 0.0
        })
    }

    /// The matrix at ζ off the jump contour.
    pub fn eval(&self, zeta: Complex64) -> Result<CMatrix> {
        if !zeta.is_finite() {
            return Err(ParametrixError::Domain(format!(
                "zeta = {zeta} is not finite"
            )));
        }
        match self.kind {
            ParametrixKind::MeiP | ParametrixKind::MeiQ | ParametrixKind::Airy
                if self.on_contour(zeta) =>
            {
                Err(ParametrixError::Domain(format!(
                    "zeta = {zeta} lies on the jump contour"
                )))
            }
            ParametrixKind::MeiP => self.eval_mei_p(zeta),
            ParametrixKind::MeiQ => self.eval_mei_q(zeta),
            ParametrixKind::Airy => eval_airy(zeta),
            ParametrixKind::GlobalP | ParametrixKind::GlobalQ => {
                let g = self
                    .global
                    .as_ref()
                    .ok_or_else(|| ParametrixError::Domain("missing global data".into()))?;
                let (a, b) = g.eval(zeta)?;
                Ok(CMatrix::from_row_slice(
                    1,
                    2,
                    &[a, b.unwrap_or(c(f64::NAN, f64::NAN))],
                ))
            }
        }
    }

    fn g_big(&self, k: u32, ln_zeta: Complex64) -> Result<Complex64> {
        let p = MeijerGPattern::new(MeijerFamily::ThetaPlusOneZero, self.theta, self.alpha, k)?;
        Ok(meijer_g_on_sheet(&p, ln_zeta, &self.strategy)?)
    }

    fn eval_mei_p(&self, zeta: Complex64) -> Result<CMatrix> {
        let (theta, alpha) = (self.theta, self.alpha);
        let th = theta as f64;
        let d = theta as usize + 1;
        let a = (alpha + 1.0 - th) / th;
        let l = zeta.ln();
        let arg = l.im;
        let root = (l / th).exp();
        let ipi = c(0.0, PI);
        let two_pi_i = c(0.0, 2.0 * PI);
        let mut m = CMatrix::zeros(d, d);
        for k in 0..=theta {
            let s = sign(k);
            let r = k as usize;
            for j in 2..=theta {
                let w = cis_pi(2.0 * (j - 1) as f64 / th) * root;
                m[(r, j as usize)] = s * th * psi_k(theta, alpha, k, w, &self.strategy)?;
            }
            m[(r, 1)] = if arg.abs() > PI / 2.0 {
                s * th * psi_k(theta, alpha, k, root, &self.strategy)?
            } else if arg > 0.0 {
                -th * (-a * l).exp() * self.g_big(k, l + ipi)? / two_pi_i
            } else {
                th * (-a * l).exp() * self.g_big(k, l - ipi)? / two_pi_i
            };
            m[(r, 0)] = if arg > 0.0 {
                self.g_big(k, l - ipi)?
            } else {
                self.g_big(k, l + ipi)?
            } / two_pi_i;
        }
        Ok(m)
    }

    /// ψ̃_k(w) = (−1)^{k+1} i (2π)^{−θ} w^α G^{θ+1,0}_{dual}(w^θ), principal in w.
    fn psi_tilde(&self, k: u32, ln_w: Complex64) -> Result<Complex64> {
        let th = self.theta as f64;
        let p = MeijerGPattern::new(
            MeijerFamily::ThetaPlusOneZeroDual,
            self.theta,
            self.alpha,
            k,
        )?;
        let g = meijer_g_scaled(&p, th * ln_w, self.alpha / th, &self.strategy)?;
        Ok(-sign(k) * Complex64::i() * (2.0 * PI).powf(-th) * g)
    }

    fn eval_mei_q(&self, zeta: Complex64) -> Result<CMatrix> {
        let (theta, alpha) = (self.theta, self.alpha);
        let th = theta as f64;
        let d = theta as usize + 1;
        let l = zeta.ln();
        let arg = l.im;
        let mut m = CMatrix::zeros(d, d);
        for k in 0..=theta {
            let r = k as usize;
            for j in 1..=theta {
                // −e^{2(j−1)πi/θ} ζ^{1/θ}
                let lw = principal_log(l.re / th, l.im / th + PI + 2.0 * PI * (j - 1) as f64 / th);
                m[(r, j as usize)] = self.psi_tilde(k, lw)?;
            }
            let p = MeijerGPattern::new(MeijerFamily::OneZero, theta, alpha, k)?;
            let mut v = sign(k) * meijer_g(&p, zeta, &self.strategy)?;
            if arg.abs() < PI / 2.0 {
                let lw = principal_log(l.re / th, l.im / th + PI);
                let extra = (-alpha / th * l).exp() * self.psi_tilde(k, lw)?;
                if arg > 0.0 {
                    v -= extra;
                } else {
                    v += extra;
                }
            }
            m[(r, 0)] = v;
        }
        Ok(m)
    }

    /// The jump matrix J on the ray through ζ, with Ψ₊ = Ψ₋ J.
    pub fn jump_matrix(&self, ray: &JumpRay, zeta: Complex64) -> Result<CMatrix> {
        let d = self.shape().0;
        let (theta, alpha) = (self.theta, self.alpha);
        let th = theta as f64;
        let one = c(1.0, 0.0);
        let mut m = CMatrix::identity(d, d);
        let real_axis = ray.angle == 0.0;
        let negative_axis = (ray.angle.abs() - PI).abs() < 1e-15;
        match self.kind {
            ParametrixKind::MeiP => {
                let z = cpow(zeta, (alpha + 1.0 - th) / th);
                if real_axis {
                    m[(0, 0)] = c(0.0, 0.0);
                    m[(1, 1)] = c(0.0, 0.0);
                    m[(0, 1)] = -th / z;
                    m[(1, 0)] = z / th;
                } else if negative_axis {
                    m = m_cyc(theta);
                } else {
                    m[(0, 1)] = th / z;
                }
            }
            ParametrixKind::MeiQ => {
                let z = cpow(zeta, alpha / th);
                if real_axis {
                    m[(0, 0)] = c(0.0, 0.0);
                    m[(1, 1)] = c(0.0, 0.0);
                    m[(0, 1)] = z;
                    m[(1, 0)] = -one / z;
                } else if negative_axis {
                    m = m_cyc(theta);
                } else {
                    m[(1, 0)] = one / z;
                }
            }
            ParametrixKind::Airy => {
                if real_axis {
                    m[(0, 1)] = one;
                } else if negative_axis {
                    m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), one, -one, c(0.0, 0.0)]);
                } else {
                    m[(1, 0)] = one;
                }
            }
            _ => {
                return Err(ParametrixError::Domain(
                    "global kinds have no ray jumps".into(),
                ))
            }
        }
        Ok(m)
    }

    /// Boundary values (Ψ₊, Ψ₋) at ζ on `ray`, from samples at distances h and
    /// 2h on either side combined by Richardson extrapolation.
    pub fn boundary_values(&self, ray: &JumpRay, zeta: Complex64) -> Result<(CMatrix, CMatrix)> {
        let h = ONE_SIDED_DISTANCE * zeta.norm().max(1.0);
        let n = ray.plus_normal();
        let side = |s: f64| -> Result<CMatrix> {
            let a = self.eval(zeta + s * h * n)?;
            let b = self.eval(zeta + 2.0 * s * h * n)?;
            Ok(a * c(2.0, 0.0) - b)
        };
        Ok((side(1.0)?, side(-1.0)?))
    }

    /// ‖Ψ₊ − Ψ₋J‖/‖Ψ₋‖ at the point r e^{i angle} of `ray`.
    pub fn jump_residual(&self, ray: &JumpRay, r: f64) -> Result<f64> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(ParametrixError::Domain(format!(
                "ray parameter r = {r} must be positive"
            )));
        }
        let zeta = Complex64::from_polar(r, ray.angle);
        let zeta = if ray.angle == PI || ray.angle == -PI {
            c(-r, 0.0)
        } else {
            zeta
        };
        let (plus, minus) = self.boundary_values(ray, zeta)?;
        let j = self.jump_matrix(ray, zeta)?;
        Ok(frobenius(&(&plus - &minus * j)) / frobenius(&minus))
    }

    pub fn determinant(&self, zeta: Complex64) -> Result<Complex64> {
        let (r, col) = self.shape();
        if r != col {
            return Err(ParametrixError::Domain(format!(
                "{} is not square",
                self.kind.name()
            )));
        }
        Ok(self.eval(zeta)?.determinant())
    }

    /// The closed-form determinant.
    pub fn expected_determinant(&self, zeta: Complex64) -> Result<Complex64> {
        let th = self.theta as f64;
        let z = cpow(zeta, (th - 1.0) / 2.0);
        match self.kind {
            ParametrixKind::MeiP => Ok(th.powf(th)
                * (2.0 * PI).powf((th + 1.0) * (th - 2.0) / 2.0)
                * cis_pi(th * (3.0 - th) / 4.0)
                * z),
            ParametrixKind::MeiQ => Ok((2.0 * PI).powf(-th * (th + 1.0) / 2.0)
                * cis_pi((th + 1.0) * (2.0 - th) / 4.0)
                * z),
            ParametrixKind::Airy => Ok(c(1.0, 0.0)),
            _ => Err(ParametrixError::Domain(format!(
                "{} is not square",
                self.kind.name()
            ))),
        }
    }

    /// |det Ψ(ζ)/expected − 1|.
    pub fn determinant_residual(&self, zeta: Complex64) -> Result<f64> {
        Ok((self.determinant(zeta)? / self.expected_determinant(zeta)? - 1.0).norm())
    }

    /// Frobenius norm of [`Self::normalized_matrix`].
    pub fn normalized_residual(&self, zeta: Complex64) -> Result<f64> {
        Ok(frobenius(&self.normalized_matrix(zeta)?))
    }

    /// Ψ with the leading large-ζ behaviour divided out, minus I: the
    /// relative correction term.
    pub fn normalized_matrix(&self, zeta: Complex64) -> Result<CMatrix> {
        let half = HalfPlane::of(zeta)?;
        let (theta, alpha) = (self.theta, self.alpha);
        let th = theta as f64;
        let psi = self.eval(zeta)?;
        let (lead, right) = match self.kind {
            ParametrixKind::MeiP => {
                let pow = (alpha + 1.5) / (th + 1.0) - (alpha + 1.0) / th;
                let pref = th * (2.0 * PI).powf(th / 2.0) / (th + 1.0).sqrt() / c(0.0, 2.0 * PI)
                    * cis_pi(2.0 * (alpha + 1.0) / th - (alpha + 1.5) / (th + 1.0))
                    * cpow(zeta, pow);
                let lam = lambda(theta, zeta, half);
                let x = xi(theta, alpha, zeta, half);
                let right: Vec<Complex64> = lam.iter().zip(&x).map(|(l, x)| l.exp() / x).collect();
                (upsilon(theta, zeta) * omega(theta, half) * pref, right)
            }
            ParametrixKind::MeiQ => {
                let pow = alpha / th - (alpha + 0.5) / (th + 1.0);
                let pref = cis_pi((alpha + 0.5) / (th + 1.0) - 2.0 * alpha / th)
                    / ((th + 1.0) * (2.0 * PI).powf(th)).sqrt()
                    * cpow(zeta, pow);
                let lam = lambda(theta, zeta, half);
                let x = xi_tilde(theta, alpha, zeta, half);
                let right: Vec<Complex64> =
                    lam.iter().zip(&x).map(|(l, x)| (-l).exp() / x).collect();
                (upsilon(theta, zeta) * omega(theta, half) * pref, right)
            }
            ParametrixKind::Airy => {
                let q = cpow(zeta, 0.25);
                let e = cis_pi(-0.25);
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let lead =
                    CMatrix::from_row_slice(2, 2, &[s * e / q, s / (e * q), -s * e * q, s * q / e]);
                let t = 2.0 / 3.0 * cpow(zeta, 1.5);
                (lead, vec![t.exp(), (-t).exp()])
            }
            _ => {
                return Err(ParametrixError::Domain(
                    "no large-z normalization for global kinds".into(),
                ))
            }
        };
        let inv = lead
            .try_inverse()
            .ok_or_else(|| ParametrixError::NonConvergence("singular leading term".into()))?;
        let mut m = inv * psi;
        for (j, f) in right.iter().enumerate() {
            for i in 0..m.nrows() {
                m[(i, j)] *= f;
            }
        }
        let d = m.nrows();
        Ok(m - CMatrix::identity(d, d))
    }

    /// Exponent of the correction term predicted at infinity.
    pub fn predicted_decay(&self) -> f64 {
        match self.kind {
            ParametrixKind::Airy => -1.5,
            _ => -1.0 / (self.theta as f64 + 1.0),
        }
    }
}

fn eval_airy(zeta: Complex64) -> Result<CMatrix> {
    let w = cis_pi(2.0 / 3.0);
    let s = (2.0 * PI).sqrt() * cis_pi(-0.25);
    let (a0, d0) = airy(zeta)?;
    let (a1, d1) = airy(w * zeta)?;
    let (a2, d2) = airy(w * w * zeta)?;
    let (y0, y0p) = (s * a0, s * d0);
    let (y1, y1p) = (s * w * a1, s * w * w * d1);
    let (y2, y2p) = (s * w * w * a2, s * w * d2);
    let arg = zeta.arg();
    let v = if arg > 2.0 * PI / 3.0 {
        [-y1, -y2, -y1p, -y2p]
    } else if arg > 0.0 {
        [y0, -y2, y0p, -y2p]
    } else if arg > -2.0 * PI / 3.0 {
        [y0, y1, y0p, y1p]
    } else {
        [-y2, y1, -y2p, y1p]
    };
    Ok(CMatrix::from_row_slice(2, 2, &v))
}

/// Decay report of [`asymptotic_residual`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticReport {
    /// (|ζ|, residual) per sample.
    pub samples: Vec<(f64, f64)>,
    pub fitted_exponent: f64,
    pub predicted_exponent: f64,
}

/// Normalized residual at each ζ and the least-squares slope of
/// log residual against log |ζ|.
pub fn asymptotic_residual(pm: &ParametrixMatrix, zetas: &[Complex64]) -> Result<AsymptoticReport> {
    let mut samples = Vec::with_capacity(zetas.len());
    for &z in zetas {
        let r = pm.normalized_residual(z)?;
        if !(r.is_finite() && r > 0.0) {
            return Err(ParametrixError::NonConvergence(format!(
                "residual {r} at zeta = {z}"
            )));
        }
        samples.push((z.norm(), r));
    }
    if samples.len() < 2 {
        return Err(ParametrixError::Domain(
            "need at least two sample points".into(),
        ));
    }
    let fitted_exponent = fit_slope(&samples);
    if !fitted_exponent.is_finite() {
        return Err(ParametrixError::NonConvergence(
            "decay fit is degenerate".into(),
        ));
    }
    Ok(AsymptoticReport {
        samples,
        fitted_exponent,
        predicted_exponent: pm.predicted_decay(),
    })
}

/// Least-squares slope of log y against log x.
pub fn fit_slope(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in samples {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Which global parametrix: P^(∞) for the p-side problem, P̃^(∞) for the q-side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GlobalKind {
    P,
    Q,
}

/// The row (P₁, P₂) built from a scalar function F on the s-plane of J_c:
/// the first component is F on the exterior of D pulled back by I₁ and the
/// second is F on D pulled back by I₂ (roles swapped for the q-side).
#[derive(Clone, Debug)]
pub struct GlobalParametrix {
    pub map: ConformalMap,
    pub alpha: f64,
    pub theta: u32,
    pub kind: ParametrixKind,
}

pub fn build_global(
    map: ConformalMap,
    alpha: f64,
    theta: u32,
    kind: GlobalKind,
) -> Result<GlobalParametrix> {
    check_params(theta, alpha)?;
    if map.theta != theta as f64 {
        return Err(ParametrixError::Domain(format!(
            "map has theta = {}, expected {theta}",
            map.theta
        )));
    }
    let kind = match kind {
        GlobalKind::P => ParametrixKind::GlobalP,
        GlobalKind::Q => ParametrixKind::GlobalQ,
    };
    Ok(GlobalParametrix {
        map,
        alpha,
        theta,
        kind,
    })
}

/// √((s+1)(s−s_b)) with cut [−1, s_b], ~ s at infinity.
fn sqrt_std(s: Complex64, sb: f64) -> Complex64 {
    (s + 1.0).sqrt() * (s - sb).sqrt()
}

impl GlobalParametrix {
    fn sb(&self) -> f64 {
        self.map.s_b
    }

    /// The square root continued into D across the curve that is not its
    /// cut: across γ₂ for the p-side (cut on γ₁), across γ₁ for the q-side.
    fn sqrt_inside(&self, s: Complex64) -> Complex64 {
        let sb = self.sb();
        let upper_is_std = self.kind == ParametrixKind::GlobalQ;
        if s.im > 0.0 {
            if upper_is_std {
                sqrt_std(s, sb)
            } else {
                -sqrt_std(s, sb)
            }
        } else if s.im < 0.0 {
            if upper_is_std {
                -sqrt_std(s, sb)
            } else {
                sqrt_std(s, sb)
            }
        } else {
            // on (0, s_b): the limit from the side where the branch is standard
            let v = (s.re + 1.0).sqrt() * (sb - s.re).sqrt();
            if upper_is_std {
                c(0.0, v)
            } else {
                c(0.0, -v)
            }
        }
    }

    /// F(s) for s outside D.
    pub fn f_outer(&self, s: Complex64) -> Complex64 {
        let (a, th, sb) = (self.alpha, self.theta as f64, self.sb());
        let q = sqrt_std(s, sb);
        let ratio = (s + 1.0) / s;
        match self.kind {
            ParametrixKind::GlobalP => s / q * cpow(ratio, (th - a - 1.0) / th),
            _ => self.map.c.powf(a) * sb.sqrt() * Complex64::i() / q * cpow(ratio, a / th),
        }
    }

    /// F(s) for s inside D.
    pub fn f_inner(&self, s: Complex64) -> Complex64 {
        let (a, th, sb) = (self.alpha, self.theta as f64, self.sb());
        let q = self.sqrt_inside(s);
        match self.kind {
            ParametrixKind::GlobalP => {
                self.map.c.powf(a + 1.0 - th) * s * cpow(s + 1.0, a + 1.0 - th) / (th * q)
            }
            _ => sb.sqrt() * Complex64::i() / q * cpow(s + 1.0, -a),
        }
    }

    /// Component defined on ℂ∖[0, b].
    pub fn outer_component(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.f_outer(self.map.invert_outer(z)?))
    }

    /// Component defined on the sector |arg z| < π/θ off [0, b].
    pub fn inner_component(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.f_inner(self.map.invert_inner(z)?))
    }

    /// (first, second) components at z; the sector component is `None`
    /// outside its sector.
    pub fn eval(&self, z: Complex64) -> Result<(Complex64, Option<Complex64>)> {
        let in_sector = z.arg().abs() < PI / self.theta as f64;
        let outer = self.outer_component(z)?;
        let inner = if in_sector {
            Some(self.inner_component(z)?)
        } else {
            None
        };
        Ok(match self.kind {
            ParametrixKind::GlobalP => (outer, inner),
            _ => match inner {
                Some(i) => (i, Some(outer)),
                None => (c(f64::NAN, f64::NAN), Some(outer)),
            },
        })
    }

    /// (first, second) at x + iε for ε of either sign, extrapolated to ε → 0.
    fn one_sided(&self, x: f64, side: f64) -> Result<(Complex64, Complex64)> {
        let h = ONE_SIDED_DISTANCE * self.map.b;
        let at = |t: f64| -> Result<(Complex64, Complex64)> {
            let (a, b) = self.eval(c(x, side * t))?;
            Ok((
                a,
                b.ok_or_else(|| ParametrixError::Domain(format!("x = {x} outside the sector")))?,
            ))
        };
        let (a1, b1) = at(h)?;
        let (a2, b2) = at(2.0 * h)?;
        Ok((2.0 * a1 - a2, 2.0 * b1 - b2))
    }

    /// Relative residual of the (0, b) jump: (P₁, P₂)₊ = (P₁, P₂)₋ J with
    /// J = [[0, x^{α+1−θ}/θ], [−θ x^{−(α+1−θ)}, 0]] for the p-side and
    /// J = [[0, x^α], [−x^{−α}, 0]] for the q-side.
    pub fn jump_residual(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < self.map.b) {
            return Err(ParametrixError::Domain(format!(
                "x = {x} is outside (0, b)"
            )));
        }
        let (a, th) = (self.alpha, self.theta as f64);
        let (j01, j10) = match self.kind {
            ParametrixKind::GlobalP => {
                let w = x.powf(a + 1.0 - th);
                (w / th, -th / w)
            }
            _ => (x.powf(a), -x.powf(-a)),
        };
        let (p1, p2) = self.one_sided(x, 1.0)?;
        let (m1, m2) = self.one_sided(x, -1.0)?;
        let e1 = (p1 - j10 * m2).norm() / p1.norm();
        let e2 = (p2 - j01 * m1).norm() / p2.norm();
        Ok(e1.max(e2))
    }

    /// Predicted exponent of the first component at 0:
    /// (θ − 2(α+1))/(2(1+θ)) for the p-side and −(α+1/2)θ/(1+θ) for the q-side.
    pub fn exponent_at_zero(&self) -> f64 {
        let (a, th) = (self.alpha, self.theta as f64);
        match self.kind {
            ParametrixKind::GlobalP => (th - 2.0 * (a + 1.0)) / (2.0 * (1.0 + th)),
            _ => -(a + 0.5) * th / (1.0 + th),
        }
    }

    /// Slope of log |first component| against log |z| between two small radii
    /// on the ray arg z = φ.
    pub fn fitted_exponent_at_zero(&self, r1: f64, r2: f64, phi: f64) -> Result<f64> {
        let first = |r: f64| -> Result<f64> {
            let (a, _) = self.eval(Complex64::from_polar(r, phi))?;
            Ok(a.norm())
        };
        Ok((first(r2)?.ln() - first(r1)?.ln()) / (r2.ln() - r1.ln()))
    }
}

/// `global_jump_residual(gp, x)`.
pub fn global_jump_residual(gp: &GlobalParametrix, x: f64) -> Result<f64> {
    gp.jump_residual(x)
}
