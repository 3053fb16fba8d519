//! Function-space machinery: bases, fields, Gaussian measures, KL ensembles,
//! subspaces and weighted norms.
//!
//! All arithmetic happens in coefficient space. Spectral bases are
//! orthonormal, so white noise, norms and the KL expansion are exact and do
//! not depend on a grid.

mod basis;
mod function;
mod measure;
mod norm;
mod subspace;

pub use basis::{sine_mode, Basis, DARCY_SIDE};
pub use function::Field;
pub use measure::{covariance_darcy, covariance_elliptic, kl_ensemble, sample_prior, GaussianMeasure};
pub use norm::{weighted_misfit, WeightedNorm};
pub use subspace::{Projection, Subspace, GRAM_CUTOFF};
