//! Expected number of K-level crossings of random algebraic polynomials
//! `P_n(x) = Σ X_k x^k` whose coefficients form a stationary Gaussian
//! sequence described by a spectral density.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod error;
mod gk;
pub mod moments;
pub mod montecarlo;
pub mod quadrature;
mod roots;
pub mod spectrum;
mod sum;

pub use error::{Error, Result};
