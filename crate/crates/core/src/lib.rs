//! Random multiplicative functions and the exponential sums
//! `P_N(θ) = N^{-1/2} Σ_{n≤N} f(n) e(nθ)`: sieving, sampling, FFT evaluation,
//! conditional variances and the classical bounds used around them.
//!
//! Kernels are generic over [`scalar::Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common cases.

// NaN-rejecting range checks read best as negated comparisons
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counter;
pub mod error;
pub mod estimates;
pub mod expsum;
pub mod ntcore;
pub mod rmf;
pub mod scalar;
pub mod variance;

pub use error::{Error, Result};
pub use expsum::{CoefficientFilter, DiscretizationPoint, GridEvaluation, MaxModulus};
pub use ntcore::{build_prime_table, Exponent, Factorization, PrimeTable};
pub use rmf::{PrimeAssignment, RmfKind, RmfValues};
pub use scalar::Real;
pub use variance::{Normalization, VarianceSpec};

pub type RmfValues64 = RmfValues<f64>;
pub type RmfValues32 = RmfValues<f32>;
pub type PrimeAssignment64 = PrimeAssignment<f64>;
pub type GridEvaluation64 = GridEvaluation<f64>;
pub type GridEvaluation32 = GridEvaluation<f32>;
