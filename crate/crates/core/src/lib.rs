//! Numerical toolkit for Laguerre-type Muttalib–Borodin ensembles.
//!
//! The crate covers the equilibrium problem with its two logarithmic
//! interactions, finite-n biorthogonal polynomials in arbitrary precision,
//! the Meijer-G hard-edge limit kernel, and the model Riemann–Hilbert
//! parametrices used in the steepest-descent analysis, together with
//! checkers for their jump conditions, determinants and asymptotics.

pub mod biorthogonal;
pub mod conformal_map;
pub mod equilibrium;
pub mod hardedge;
pub mod parametrix;
pub mod potential;
pub mod quad;
pub mod specialfn;

pub use num_complex::Complex64;
