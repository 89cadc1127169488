//! Complex Gamma function in double precision.
//!
//! Lanczos approximation (g = 7, nine terms) on the right half-plane and the
//! reflection formula elsewhere. Only the exponential of [`ln_gamma`] is
//! meaningful: the imaginary part is not tied to a particular branch of the
//! log-Gamma function.

use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// A logarithm of Γ(z). Any branch; `exp` of the result is Γ(z).
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1−z) = π / sin(πz)
        Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma(Complex64::new(1.0, 0.0) - z)
    } else {
        let z = z - 1.0;
        let mut x = Complex64::new(LANCZOS[0], 0.0);
        for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
            x += p / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
    }
}

/// Γ(z). Returns infinity at the poles.
pub fn gamma(z: Complex64) -> Complex64 {
    if is_nonpositive_integer(z) {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    ln_gamma(z).exp()
}

/// 1/Γ(z), entire; exactly zero at the poles of Γ.
pub fn rgamma(z: Complex64) -> Complex64 {
    if is_nonpositive_integer(z) {
        return Complex64::new(0.0, 0.0);
    }
    (-ln_gamma(z)).exp()
}

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0
}

/// A logarithm of sin(πz) that does not overflow for large |Im z|.
pub(crate) fn ln_sin_pi(z: Complex64) -> Complex64 {
    let w = PI * z;
    let i = Complex64::new(0.0, 1.0);
    if w.im > 1.0 {
        // sin w = (i/2) e^{−iw} (1 − e^{2iw})
        -i * w + Complex64::new(0.5, 0.0).ln() + i.ln() + (1.0 - (2.0 * i * w).exp()).ln()
    } else if w.im < -1.0 {
        // sin w = −(i/2) e^{iw} (1 − e^{−2iw})
        i * w + Complex64::new(0.5, 0.0).ln() + (-i).ln() + (1.0 - (-2.0 * i * w).exp()).ln()
    } else {
        w.sin().ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_and_half_integer_values() {
        assert!((gamma(Complex64::new(5.0, 0.0)).re - 24.0).abs() < 1e-12);
        let half = gamma(Complex64::new(0.5, 0.0));
        assert!((half.re - PI.sqrt()).abs() < 1e-14);
        let neg = gamma(Complex64::new(-0.5, 0.0));
        assert!((neg.re + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn complex_value() {
        // Γ(1+i)
        let g = gamma(Complex64::new(1.0, 1.0));
        assert!((g.re - 0.498_015_668_118_356).abs() < 1e-13);
        assert!((g.im + 0.154_949_828_301_811).abs() < 1e-13);
    }

    #[test]
    fn poles() {
        assert_eq!(rgamma(Complex64::new(-3.0, 0.0)), Complex64::new(0.0, 0.0));
        assert!(gamma(Complex64::new(0.0, 0.0)).re.is_infinite());
    }

    #[test]
    fn large_imaginary_part_reflection() {
        // |Γ(1/2 + it)|² = π / cosh(πt)
        for &t in &[5.0, 20.0, 60.0] {
            let z = Complex64::new(-2.5, t);
            let lhs = gamma(z).norm();
            // Γ(−5/2+it) = Γ(1/2+it)/((−5/2+it)(−3/2+it)(−1/2+it))
            let base = (PI / (PI * t).cosh()).sqrt();
            let den = (z * (z + 1.0) * (z + 2.0)).norm();
            assert!((lhs / (base / den) - 1.0).abs() < 1e-11, "t={t}");
        }
    }
}
