//! Recovery of sparse trigonometric polynomials from random samples.
//!
//! A trigonometric polynomial `f(x) = Σ_{k∈Γ} c_k e^{ik·x}` on `[0,2π)^d`
//! with few non-zero coefficients can be reconstructed from a small number
//! of randomly placed, noise-perturbed samples. This crate provides the
//! measurement machinery and both standard reconstruction methods:
//!
//! - [`fourier_ops`] — frequency sets, random sampling models, and the
//!   sampling operator with matrix-free forward/adjoint actions and an FFT
//!   fast path on full grids;
//! - [`omp`] — orthogonal matching pursuit with incremental least squares;
//! - [`bpdn`] — an operator-splitting solver for ℓ1 minimization subject
//!   to an ℓ2 residual constraint;
//! - [`analysis`] — coherence, Gram-submatrix eigenvalue extremes, and
//!   restricted isometry constants (exhaustive and randomized);
//! - [`bounds`] — closed-form evaluators for the sampling-complexity
//!   conditions and tail bounds that govern when recovery succeeds;
//! - [`harness`] — a deterministic, seedable Monte-Carlo experiment runner
//!   with CSV/JSON output.

// Numeric-input guards are written `!(x > 0.0)` throughout: the negated
// form also rejects NaN, which the suggested `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bounds;
pub mod bpdn;
pub mod error;
pub mod fourier_ops;
pub mod harness;
mod linalg;
pub mod omp;
pub mod rng;

pub use error::{Error, Result};
pub use fourier_ops::{
    noise_on_sphere, FrequencySet, FrequencySpec, MeasurementOperator, SamplingModel, SamplingSet,
    SparseCoefficients,
};
