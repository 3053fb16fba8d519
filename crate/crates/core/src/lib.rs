//! Iterative ensemble Kalman inversion for `y = G(u) + η`.
//!
//! The crate bundles everything needed to run the method end to end:
//!
//! * [`numerics`]: dense Cholesky/Jacobi routines, a banded SPD solver and
//!   keyed Gaussian streams;
//! * [`field`]: spectral bases, Gaussian measures, Karhunen-Loève ensembles,
//!   subspaces and weighted norms;
//! * [`forward`]: the [`ForwardModel`](forward::ForwardModel) trait with a 1D
//!   elliptic model and a 2D Darcy groundwater model;
//! * [`eki`]: the ensemble iteration itself (predict, analyze, estimate,
//!   discrepancy stopping);
//! * [`baselines`]: Tikhonov-Phillips, subspace least squares and best
//!   approximation;
//! * [`harness`]: experiment configs, synthetic truths, run records and
//!   summary tables.

pub mod baselines;
pub mod eki;
pub mod error;
pub mod field;
pub mod forward;
pub mod harness;
pub mod numerics;

pub use error::{Error, Result};
