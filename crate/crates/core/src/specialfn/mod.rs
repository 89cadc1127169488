//! Special functions: complex Gamma, Bessel J, Airy, and the Meijer
//! G-functions of the hard-edge parametrices.
//!
//! Series are summed in multiprecision (via `rug`) with the working precision
//! raised until the cancellation seen in the partial sums is covered, so the
//! returned doubles carry close to full relative accuracy. Contour quadrature
//! is available for the Meijer G-functions as an independent check and for
//! the logarithmic (integer α) cases.

mod airy;
mod bessel;
mod gamma;
mod meijer;
pub(crate) mod mp;

pub use airy::airy;
pub use bessel::{bessel_j, bessel_j_complex};
pub use gamma::{gamma, ln_gamma, rgamma};
pub use meijer::{
    meijer_g, meijer_g_on_sheet, meijer_g_scaled, meijer_jump_identity_residual, mellin_barnes,
    psi_k, EvalMethod, EvalStrategy, MeijerFamily, MeijerGPattern,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialFnError {
    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
