//! Exact tensor completion under arbitrary linear transforms along the third
//! mode.
//!
//! A tensor `X` of size `n1 x n2 x n3` is mapped by a transform `T` (an
//! injective `N3 x n3` matrix acting on every tube) into the transform domain,
//! where the natural t-product, t-SVD and tensor nuclear norm act slice by
//! slice. [`solver::admm_complete`] recovers a low-rank tensor from a subset
//! of its entries; [`generators`] draws test tensors of prescribed transform
//! rank and [`analysis`] holds the diagnostics and the phase harness.

pub mod analysis;
pub mod error;
pub mod generators;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod solver;
pub mod tensor;
pub mod transform;
pub mod tsvd;

pub use error::{Error, Result};
pub use linalg::c64;
pub use solver::{admm_complete, SamplingMask, SolverConfig, SolverReport};
pub use tensor::Tensor3;
pub use transform::LinearTransform;
pub use tsvd::{t_svd, TSvdFactors};
