//! Frequency sets, random sampling models, sparse coefficient vectors, and
//! the sampled Fourier measurement operator.
//!
//! A trigonometric polynomial `f(x) = sum_{k in Gamma} c_k exp(i k . x)` on
//! `[0, 2*pi)^d` is observed at N sampling points drawn from one of three
//! probability models. The resulting linear map from coefficients to sample
//! values is the [`MeasurementOperator`]; everything else in the crate is
//! built on its forward and adjoint actions.

mod coefficients;
mod frequency;
mod operator;
mod sampling;

pub use coefficients::{noise_on_sphere, SparseCoefficients};
pub use frequency::{FrequencySet, FrequencySpec};
pub use operator::{MeasurementOperator, DEFAULT_MATERIALIZE_THRESHOLD};
pub use sampling::{SamplingModel, SamplingSet};
