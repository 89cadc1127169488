//! Small helpers around `rug` for multiprecision series summation.

use num_complex::Complex64;
use rug::{Complex, Float};

/// Precision ceiling for adaptive retries. Beyond this we report failure
/// rather than grinding.
pub const MAX_PREC: u32 = 1 << 16;

pub fn to_mp(z: Complex64, prec: u32) -> Complex {
    Complex::with_val(prec, (z.re, z.im))
}

pub fn to_c64(z: &Complex) -> Complex64 {
    Complex64::new(z.real().to_f64(), z.imag().to_f64())
}

/// Rough log2 of |x|, `None` for zero.
pub fn log2_abs_float(x: &Float) -> Option<f64> {
    if x.is_zero() {
        return None;
    }
    if x.is_infinite() || x.is_nan() {
        return Some(f64::INFINITY);
    }
    let (m, e) = x.to_f64_exp();
    Some(m.abs().log2() + e as f64)
}

/// Rough log2 of |z|, `None` for zero.
pub fn log2_abs(z: &Complex) -> Option<f64> {
    match (log2_abs_float(z.real()), log2_abs_float(z.imag())) {
        (None, None) => None,
        (Some(a), None) | (None, Some(a)) => Some(a),
        (Some(a), Some(b)) => {
            let (hi, lo) = if a > b { (a, b) } else { (b, a) };
            Some(hi + 0.5 * (1.0 + (2f64).powf(2.0 * (lo - hi))).log2())
        }
    }
}

/// Outcome of one multiprecision summation attempt.
pub struct SeriesSum {
    pub value: Complex,
    /// log2 of the largest term magnitude encountered.
    pub peak_log2: f64,
}

/// Runs `attempt` at increasing precision until the cancellation measured by
/// the attempt (peak term against final value) leaves at least
/// `target_bits` correct bits. Returns the value and the precision used.
pub fn sum_adaptive<E>(
    initial_prec: u32,
    target_bits: u32,
    mut attempt: impl FnMut(u32) -> Result<SeriesSum, E>,
    on_fail: impl Fn(u32, f64) -> E,
) -> Result<(Complex, u32), E> {
    let mut prec = initial_prec.max(64);
    for _ in 0..8 {
        let s = attempt(prec)?;
        let loss = match log2_abs(&s.value) {
            Some(v) => (s.peak_log2 - v).max(0.0),
            None => f64::INFINITY,
        };
        let needed = loss + target_bits as f64 + 16.0;
        if needed <= prec as f64 {
            return Ok((s.value, prec));
        }
        if !needed.is_finite() {
            // Exact zero: one more attempt at doubled precision decides it.
            if prec >= MAX_PREC / 2 {
                return Err(on_fail(prec, loss));
            }
            prec *= 2;
            continue;
        }
        let next = (needed + 32.0).ceil() as u32;
        if next > MAX_PREC {
            return Err(on_fail(prec, loss));
        }
        // a loss close to the working precision means the value is rounding
        // noise and the true loss is unknown
        let noise = loss + 8.0 >= prec as f64;
        prec = if noise {
            next.max(2 * prec).min(MAX_PREC)
        } else {
            next.max(prec + 32)
        };
    }
    Err(on_fail(prec, f64::NAN))
}
