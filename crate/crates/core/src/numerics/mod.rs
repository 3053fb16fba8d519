//! Dense and banded linear algebra plus keyed random streams.

mod banded;
mod cholesky;
mod eigen;
mod matrix;
mod random;

pub use banded::{BandedCholesky, BandedSpd};
pub use cholesky::{spd_solve, Cholesky, JITTER_SCALE, SYMMETRY_TOLERANCE};
pub use eigen::{sym_eigen, SymEigen};
pub use matrix::{axpy, dot, gemm, norm2, DenseMatrix, Op};
pub use random::{derive_seed, gaussian_draws, Purpose, RandomStream};
