//! Bessel functions of the first kind by their power series.

use super::mp::{log2_abs, sum_adaptive, to_c64, to_mp, SeriesSum};
use super::SpecialFnError;
use num_complex::Complex64;
use rug::{Complex, Float};

/// J_ν(x) for real ν and x ≥ 0.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64, SpecialFnError> {
    if !(x >= 0.0) || !x.is_finite() || !nu.is_finite() {
        return Err(SpecialFnError::DomainError(format!(
            "bessel_j needs finite x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 {
            1.0
        } else if nu > 0.0 || nu.fract() == 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    Ok(bessel_j_complex(nu, Complex64::new(x, 0.0))?.re)
}

/// J_ν(z) = Σ_m (−1)^m (z/2)^{2m+ν} / (m! Γ(m+ν+1)), principal branch of (z/2)^ν.
pub fn bessel_j_complex(nu: f64, z: Complex64) -> Result<Complex64, SpecialFnError> {
    if z == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(if nu == 0.0 { 1.0 } else { 0.0 }, 0.0));
    }
    // Negative integer order: 1/Γ(m+ν+1) vanishes for m < −ν.
    let m0 = if nu < 0.0 && nu.fract() == 0.0 {
        (-nu) as u64
    } else {
        0
    };
    let half = z / 2.0;
    let est_peak = 2.0 * half.norm() / std::f64::consts::LN_2 + 8.0;
    let (v, _) = sum_adaptive(
        96 + est_peak as u32,
        60,
        |prec| Ok(series(nu, half, m0, prec)),
        |prec, loss| SpecialFnError::NonConvergence {
            what: "Bessel series",
            detail: format!("loss {loss:.0} bits at {prec} bits"),
        },
    )?;
    Ok(to_c64(&v))
}

fn series(nu: f64, half: Complex64, m0: u64, prec: u32) -> SeriesSum {
    let h = to_mp(half, prec);
    let h2 = Complex::with_val(prec, h.square_ref());
    let nu_mp = Float::with_val(prec, nu);
    // first term (−1)^{m0} h^{2m0+ν} / (m0! Γ(m0+ν+1))
    let mut term = Complex::with_val(prec, h.ln_ref());
    term *= Float::with_val(prec, &nu_mp + 2 * m0);
    term.exp_mut();
    let mut c = Float::with_val(prec, m0 + 1).gamma();
    c *= Float::with_val(prec, &nu_mp + (m0 + 1)).gamma();
    term /= c;
    if m0 % 2 == 1 {
        term = -term;
    }
    let mut sum = Complex::new(prec);
    let mut peak = f64::NEG_INFINITY;
    let mut m = m0;
    let mut quiet = 0;
    loop {
        let mag = log2_abs(&term).unwrap_or(f64::NEG_INFINITY);
        peak = peak.max(mag);
        sum += &term;
        m += 1;
        let mut d = Float::with_val(prec, &nu_mp + m);
        d *= m;
        term *= &h2;
        term /= &d;
        term = -term;
        let shrinking = (m as f64) * ((m as f64) + nu).abs() > half.norm_sqr();
        if shrinking && mag < peak - prec as f64 - 4.0 {
            quiet += 1;
            if quiet > 4 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    SeriesSum {
        value: sum,
        peak_log2: peak,
    }
}
