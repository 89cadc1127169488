//! Airy function Ai and its derivative from the Maclaurin series.

use super::mp::{log2_abs, sum_adaptive, to_c64, to_mp, SeriesSum};
use super::SpecialFnError;
use num_complex::Complex64;
use rug::{Complex, Float};

/// (Ai(ζ), Ai'(ζ)).
///
/// Ai = c₁ f − c₂ g with f = Σ 3^k (1/3)_k z^{3k}/(3k)!, g = Σ 3^k (2/3)_k z^{3k+1}/(3k+1)!.
pub fn airy(zeta: Complex64) -> Result<(Complex64, Complex64), SpecialFnError> {
    let est_peak = (4.0 / 3.0) * zeta.norm().powf(1.5) / std::f64::consts::LN_2 + 8.0;
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for (which, slot) in out.iter_mut().enumerate() {
        let (v, _) = sum_adaptive(
            96 + 2 * est_peak as u32,
            60,
            |prec| Ok(series(zeta, which == 1, prec)),
            |prec, loss| SpecialFnError::NonConvergence {
                what: "Airy series",
                detail: format!("loss {loss:.0} bits at {prec} bits"),
            },
        )?;
        *slot = to_c64(&v);
    }
    Ok((out[0], out[1]))
}

fn series(zeta: Complex64, derivative: bool, prec: u32) -> SeriesSum {
    let z = to_mp(zeta, prec);
    let z3 = Complex::with_val(prec, z.square_ref()) * &z;
    let third = Float::with_val(prec, 1) / 3u32;
    let c1 = {
        let mut g = Float::with_val(prec, 2u32) / 3u32;
        g.gamma_mut();
        let p = Float::with_val(
            prec,
            Float::with_val(prec, 3u32).ln() * (-2 * third.clone()),
        )
        .exp();
        p / g
    };
    let c2 = {
        let g = Float::with_val(prec, third.gamma_ref());
        let p = Float::with_val(prec, Float::with_val(prec, 3u32).ln() * (-third.clone())).exp();
        p / g
    };
    // fa = a_k z^{3k}, fd = a_k z^{3k−1} (k ≥ 1), gz = b_k z^{3k}
    let mut fa = Complex::with_val(prec, 1);
    let mut fd = Complex::with_val(prec, z.square_ref()) / 6u32;
    let mut gz = Complex::with_val(prec, 1);
    let mut sum = Complex::new(prec);
    let mut peak = f64::NEG_INFINITY;
    let mut quiet = 0;
    let mut k: u64 = 0;
    loop {
        let (tf, tg) = if derivative {
            // f' = Σ 3k a_k z^{3k−1}, g' = Σ (3k+1) b_k z^{3k}
            let tf = if k == 0 {
                Complex::new(prec)
            } else {
                Complex::with_val(prec, &fd * (3 * k))
            };
            (tf, Complex::with_val(prec, &gz * (3 * k + 1)))
        } else {
            (fa.clone(), Complex::with_val(prec, &gz * &z))
        };
        let term = Complex::with_val(prec, &tf * &c1) - Complex::with_val(prec, &tg * &c2);
        let mag = log2_abs(&tf)
            .unwrap_or(f64::NEG_INFINITY)
            .max(log2_abs(&tg).unwrap_or(f64::NEG_INFINITY))
            + log2_abs_c(&c1);
        peak = peak.max(mag);
        sum += term;
        fa *= &z3;
        fa /= (3 * k + 2) * (3 * k + 3);
        if k >= 1 {
            fd *= &z3;
            fd /= (3 * k + 2) * (3 * k + 3);
        }
        gz *= &z3;
        gz /= (3 * k + 3) * (3 * k + 4);
        k += 1;
        let shrinking = (9 * k * k) as f64 > zeta.norm().powi(3);
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

fn log2_abs_c(x: &Float) -> f64 {
    super::mp::log2_abs_float(x).unwrap_or(0.0)
}
