use crate::error::{Error, Result};
use crate::numerics::matrix::{axpy, dot, DenseMatrix};

/// Relative asymmetry tolerated on input to the SPD routines.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Relative diagonal shift applied once when the plain factorization fails.
pub const JITTER_SCALE: f64 = 1e-12;

/// Lower-triangular Cholesky factor `A = L L^T`, stored row-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    lower: Vec<f64>,
    jitter: f64,
}

impl Cholesky {
    /// Factors `a`, retrying once with a small diagonal jitter on failure.
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::DimensionMismatch(format!(
                "Cholesky of a {}x{} matrix",
                a.rows(),
                a.cols()
            )));
        }
        let asym = a.asymmetry();
        if asym > SYMMETRY_TOLERANCE {
            return Err(Error::NonSymmetric(asym));
        }
        match factor_lower(a, 0.0) {
            Ok(lower) => Ok(Self {
                n: a.rows(),
                lower,
                jitter: 0.0,
            }),
            Err(_) => {
                let n = a.rows().max(1) as f64;
                let jitter = JITTER_SCALE * a.trace() / n;
                let lower = factor_lower(a, jitter.max(0.0))?;
                Ok(Self {
                    n: a.rows(),
                    lower,
                    jitter,
                })
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Diagonal shift used to obtain the factorization (zero when none was needed).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    fn l(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.n + j]
    }

    /// Solves `A X = B` for a matrix of right-hand sides.
    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if b.rows() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {} rows, system has {}",
                b.rows(),
                self.n
            )));
        }
        let r = b.cols();
        let mut x = b.clone();
        let data = x.as_mut_slice();
        // forward: L Y = B, row by row
        for i in 0..self.n {
            let (done, rest) = data.split_at_mut(i * r);
            let row = &mut rest[..r];
            for k in 0..i {
                let lik = self.l(i, k);
                if lik != 0.0 {
                    axpy(-lik, &done[k * r..(k + 1) * r], row);
                }
            }
            let inv = 1.0 / self.l(i, i);
            row.iter_mut().for_each(|v| *v *= inv);
        }
        // backward: L^T X = Y
        for i in (0..self.n).rev() {
            let (head, tail) = data.split_at_mut((i + 1) * r);
            let row = &mut head[i * r..];
            for k in (i + 1)..self.n {
                let lki = self.l(k, i);
                if lki != 0.0 {
                    let off = (k - i - 1) * r;
                    axpy(-lki, &tail[off..off + r], row);
                }
            }
            let inv = 1.0 / self.l(i, i);
            row.iter_mut().for_each(|v| *v *= inv);
        }
        Ok(x)
    }

    pub fn solve_vec(&self, b: &[f64]) -> Result<Vec<f64>> {
        let rhs = DenseMatrix::from_row_major(b.len(), 1, b.to_vec())?;
        Ok(self.solve(&rhs)?.into_vec())
    }
}

fn factor_lower(a: &DenseMatrix, shift: f64) -> Result<Vec<f64>> {
    let n = a.rows();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s = a[(i, j)] - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
            if i == j {
                let pivot = s + shift;
                if !(pivot > 0.0) || !pivot.is_finite() {
                    return Err(Error::NotSpd { row: i, pivot });
                }
                l[i * n + i] = pivot.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Solves `A X = B` for symmetric positive-definite `A` by Cholesky factorization.
///
/// If the factorization breaks down it is retried once on `A + δI` with
/// `δ = 1e-12 · trace(A) / n`; a second failure is reported as [`Error::NotSpd`].
pub fn spd_solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if b.rows() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "spd_solve: A is {}x{}, B has {} rows",
            a.rows(),
            a.cols(),
            b.rows()
        )));
    }
    Cholesky::factor(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random::{gaussian_draws, Purpose, RandomStream};

    fn random_matrix(rows: usize, cols: usize, member: u64) -> DenseMatrix {
        let s = RandomStream::new(11, Purpose::Test, member, 0);
        DenseMatrix::from_row_major(rows, cols, gaussian_draws(&s, rows * cols)).unwrap()
    }

    #[test]
    fn identity_solve() {
        let i3 = DenseMatrix::identity(3);
        assert_eq!(spd_solve(&i3, &i3).unwrap(), i3);
    }

    #[test]
    fn diagonal_solve() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let x = spd_solve(&a, &b).unwrap();
        assert!((x[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((x[(1, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn random_spd_residual() {
        let m = random_matrix(5, 5, 1);
        let mut a = m.transpose().matmul(&m).unwrap();
        a.add_to_diagonal(&[1.0; 5]);
        a.symmetrize();
        let b = random_matrix(5, 3, 2);
        let x = spd_solve(&a, &b).unwrap();
        let resid = a.matmul(&x).unwrap().sub(&b).unwrap();
        assert!(resid.frobenius_norm() <= 1e-8 * b.frobenius_norm());
    }

    #[test]
    fn jitter_rescues_singular_psd() {
        // rank one, singular but positive semi-definite
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let chol = Cholesky::factor(&a).unwrap();
        assert!(chol.jitter() > 0.0);
    }

    #[test]
    fn rejects_indefinite_and_mismatched() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        let b = DenseMatrix::identity(2);
        assert!(matches!(spd_solve(&a, &b), Err(Error::NotSpd { .. })));
        let b3 = DenseMatrix::identity(3);
        assert!(matches!(
            spd_solve(&DenseMatrix::identity(2), &b3),
            Err(Error::DimensionMismatch(_))
        ));
        let asym = DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(spd_solve(&asym, &b), Err(Error::NonSymmetric(_))));
    }
}
