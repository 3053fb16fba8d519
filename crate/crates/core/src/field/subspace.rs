use crate::error::{Error, Result};
use crate::field::basis::Basis;
use crate::field::function::Field;
use crate::numerics::{sym_eigen, DenseMatrix, SymEigen};

/// Gram eigenvalues below this fraction of the largest are treated as null.
pub const GRAM_CUTOFF: f64 = 1e-12;

/// Linear span of an ordered list of fields.
#[derive(Debug, Clone)]
pub struct Subspace {
    members: Vec<Field>,
    gram: DenseMatrix,
    gram_eigen: SymEigen,
}

/// Least-squares coordinates of a field in a [`Subspace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coeffs: Vec<f64>,
    pub residual_norm: f64,
}

impl Subspace {
    pub fn new(members: Vec<Field>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidParameter("a subspace needs at least one member".into()))?;
        for m in &members[1..] {
            first.ensure_same_basis(m)?;
        }
        let j = members.len();
        let mut gram = DenseMatrix::zeros(j, j);
        for a in 0..j {
            for b in a..j {
                let ip = members[a].inner(&members[b])?;
                gram[(a, b)] = ip;
                gram[(b, a)] = ip;
            }
        }
        let gram_eigen = sym_eigen(&gram)?;
        Ok(Self {
            members,
            gram,
            gram_eigen,
        })
    }

    pub fn members(&self) -> &[Field] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn basis(&self) -> &Basis {
        self.members[0].basis()
    }

    pub fn gram(&self) -> &DenseMatrix {
        &self.gram
    }

    /// Number of Gram eigenvalues above the pseudo-inverse cutoff.
    pub fn rank(&self) -> usize {
        let cutoff = self.cutoff();
        self.gram_eigen.values.iter().filter(|&&l| l > cutoff).count()
    }

    fn cutoff(&self) -> f64 {
        GRAM_CUTOFF * self.gram_eigen.values.first().copied().unwrap_or(0.0).max(0.0)
    }

    /// `Σ c_j ψ_j`.
    pub fn combine(&self, coeffs: &[f64]) -> Result<Field> {
        Field::linear_combination(&self.members, coeffs)
    }

    /// Minimum-norm least-squares coordinates of `u` and the L² residual.
    pub fn project(&self, u: &Field) -> Result<Projection> {
        self.members[0].ensure_same_basis(u)?;
        let rhs = self
            .members
            .iter()
            .map(|m| m.inner(u))
            .collect::<Result<Vec<_>>>()?;
        let j = self.len();
        let cutoff = self.cutoff();
        let mut coeffs = vec![0.0; j];
        for (k, &lam) in self.gram_eigen.values.iter().enumerate() {
            if lam <= cutoff {
                continue;
            }
            let v = self.gram_eigen.vector(k);
            let w = v.iter().zip(&rhs).map(|(a, b)| a * b).sum::<f64>() / lam;
            for (c, vi) in coeffs.iter_mut().zip(&v) {
                *c += w * vi;
            }
        }
        let residual_norm = self.combine(&coeffs)?.sub(u)?.norm();
        Ok(Projection {
            coeffs,
            residual_norm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{gaussian_draws, Purpose, RandomStream};

    fn random_field(dim: usize, member: u64) -> Field {
        let s = RandomStream::new(21, Purpose::Test, member, 0);
        Field::new(Basis::sine(dim), gaussian_draws(&s, dim)).unwrap()
    }

    #[test]
    fn recovers_member() {
        let a = Subspace::new((0..4).map(|j| random_field(20, j)).collect()).unwrap();
        let p = a.project(&a.members()[0]).unwrap();
        assert!((p.coeffs[0] - 1.0).abs() < 1e-10);
        assert!(p.coeffs[1..].iter().all(|c| c.abs() < 1e-10));
        assert!(p.residual_norm < 1e-10);
    }

    #[test]
    fn orthogonal_field_projects_to_zero() {
        let members = (0..3)
            .map(|j| {
                let mut f = Field::zeros(Basis::sine(6));
                f.coeffs_mut()[j] = 1.0 + j as f64;
                f
            })
            .collect();
        let a = Subspace::new(members).unwrap();
        let mut u = Field::zeros(Basis::sine(6));
        u.coeffs_mut()[4] = 3.0;
        u.coeffs_mut()[5] = 4.0;
        let p = a.project(&u).unwrap();
        assert!(p.coeffs.iter().all(|&c| c == 0.0));
        assert!((p.residual_norm - 5.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_gram_is_handled() {
        let f = random_field(10, 1);
        let g = random_field(10, 2);
        let a = Subspace::new(vec![f.clone(), g.clone(), f.add(&g).unwrap()]).unwrap();
        assert_eq!(a.rank(), 2);
        let target = f.scaled(2.0);
        let p = a.project(&target).unwrap();
        assert!(p.residual_norm < 1e-10);
    }

    #[test]
    fn mixed_bases_rejected() {
        let err = Subspace::new(vec![Field::zeros(Basis::sine(3)), Field::zeros(Basis::sine(4))]);
        assert!(matches!(err, Err(Error::BasisMismatch { .. })));
    }
}
