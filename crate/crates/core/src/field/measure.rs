use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::basis::{cosine_table, Basis, DARCY_SIDE};
use crate::field::function::Field;
use crate::field::subspace::Subspace;
use crate::numerics::{axpy, gaussian_draws, DenseMatrix, RandomStream};

#[derive(Debug, Clone)]
enum Eigenfields {
    /// Eigenfield `j` is the basis function with coefficient index `idx[j]`.
    Coordinate(Vec<usize>),
    Dense(Vec<Field>),
}

/// Gaussian measure `N(mean, C)` with `C = Σ λ_j φ_j ⊗ φ_j`.
///
/// Eigenvalues are kept in descending order; ties keep the order in which the
/// constructor received them.
#[derive(Debug, Clone)]
pub struct GaussianMeasure {
    mean: Field,
    eigenvalues: Vec<f64>,
    eigenfields: Eigenfields,
}

impl GaussianMeasure {
    fn validate_spectrum(eigenvalues: &[f64]) -> Result<()> {
        if let Some(bad) = eigenvalues.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "covariance eigenvalue {bad} is not strictly positive"
            )));
        }
        if eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "covariance eigenvalues must be in descending order".into(),
            ));
        }
        Ok(())
    }

    /// Measure whose eigenfields are individual basis functions.
    pub fn diagonal(mean: Field, eigenvalues: Vec<f64>, indices: Vec<usize>) -> Result<Self> {
        Self::validate_spectrum(&eigenvalues)?;
        if indices.len() != eigenvalues.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} eigenvalues for {} modes",
                eigenvalues.len(),
                indices.len()
            )));
        }
        let mut seen = vec![false; mean.dim()];
        for &i in &indices {
            if i >= mean.dim() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter(format!("invalid or repeated mode index {i}")));
            }
        }
        Ok(Self {
            mean,
            eigenvalues,
            eigenfields: Eigenfields::Coordinate(indices),
        })
    }

    /// Measure with explicitly stored eigenfields, assumed L²-orthonormal
    /// (see [`orthonormality_defect`](Self::orthonormality_defect)).
    pub fn from_eigenpairs(mean: Field, eigenvalues: Vec<f64>, eigenfields: Vec<Field>) -> Result<Self> {
        Self::validate_spectrum(&eigenvalues)?;
        if eigenfields.len() != eigenvalues.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} eigenvalues for {} eigenfields",
                eigenvalues.len(),
                eigenfields.len()
            )));
        }
        for f in &eigenfields {
            mean.ensure_same_basis(f)?;
        }
        Ok(Self {
            mean,
            eigenvalues,
            eigenfields: Eigenfields::Dense(eigenfields),
        })
    }

    pub fn mean(&self) -> &Field {
        &self.mean
    }

    pub fn basis(&self) -> &Basis {
        self.mean.basis()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn eigenfield(&self, j: usize) -> Field {
        match &self.eigenfields {
            Eigenfields::Coordinate(idx) => {
                let mut f = Field::zeros(*self.basis());
                f.coeffs_mut()[idx[j]] = 1.0;
                f
            }
            Eigenfields::Dense(fields) => fields[j].clone(),
        }
    }

    /// Replaces the mean, keeping the covariance.
    pub fn with_mean(mut self, mean: Field) -> Result<Self> {
        self.mean.ensure_same_basis(&mean)?;
        self.mean = mean;
        Ok(self)
    }

    /// Largest entrywise deviation of the eigenfield Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        match &self.eigenfields {
            Eigenfields::Coordinate(_) => 0.0,
            Eigenfields::Dense(fields) => {
                let mut worst = 0.0_f64;
                for (a, fa) in fields.iter().enumerate() {
                    for (b, fb) in fields.iter().enumerate().skip(a) {
                        let target = if a == b { 1.0 } else { 0.0 };
                        let ip = fa.inner(fb).unwrap_or(f64::NAN);
                        worst = worst.max((ip - target).abs());
                    }
                }
                worst
            }
        }
    }

    /// `mean + Σ_j sqrt(λ_j) ξ_j φ_j`.
    pub fn synthesize(&self, xi: &[f64]) -> Result<Field> {
        if xi.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} KL weights for {} modes",
                xi.len(),
                self.len()
            )));
        }
        let mut out = self.mean.clone();
        match &self.eigenfields {
            Eigenfields::Coordinate(idx) => {
                let coeffs = out.coeffs_mut();
                for ((&i, &lam), &x) in idx.iter().zip(&self.eigenvalues).zip(xi) {
                    coeffs[i] += lam.sqrt() * x;
                }
            }
            Eigenfields::Dense(fields) => {
                let coeffs = out.coeffs_mut();
                for ((f, &lam), &x) in fields.iter().zip(&self.eigenvalues).zip(xi) {
                    axpy(lam.sqrt() * x, f.coeffs(), coeffs);
                }
            }
        }
        Ok(out)
    }

    /// KL coordinates `⟨u − mean, φ_j⟩`.
    pub fn kl_coordinates(&self, u: &Field) -> Result<Vec<f64>> {
        let centered = u.sub(&self.mean)?;
        Ok(match &self.eigenfields {
            Eigenfields::Coordinate(idx) => {
                let w = self.basis().l2_weight();
                idx.iter().map(|&i| w * centered.coeffs()[i]).collect()
            }
            Eigenfields::Dense(fields) => fields
                .iter()
                .map(|f| centered.inner(f))
                .collect::<Result<_>>()?,
        })
    }

    /// Whitened deviation `C^{-1/2}(u − mean)` in KL coordinates, so that
    /// its squared Euclidean norm is `‖u − mean‖²_C`.
    pub fn whiten(&self, u: &Field) -> Result<Vec<f64>> {
        Ok(self
            .kl_coordinates(u)?
            .into_iter()
            .zip(&self.eigenvalues)
            .map(|(c, lam)| c / lam.sqrt())
            .collect())
    }

    /// Covariance of the random coefficient vector, `Σ λ_j φ_j φ_jᵀ`.
    pub fn coefficient_covariance(&self) -> DenseMatrix {
        let n = self.basis().dim();
        let mut c = DenseMatrix::zeros(n, n);
        match &self.eigenfields {
            Eigenfields::Coordinate(idx) => {
                for (&i, &lam) in idx.iter().zip(&self.eigenvalues) {
                    c[(i, i)] += lam;
                }
            }
            Eigenfields::Dense(fields) => {
                for (f, &lam) in fields.iter().zip(&self.eigenvalues) {
                    let v = f.coeffs();
                    for a in 0..n {
                        axpy(lam * v[a], v, c.row_mut(a));
                    }
                }
            }
        }
        c
    }

    /// Restricts to the leading `modes` eigenpairs.
    pub fn truncated(&self, modes: usize) -> Self {
        let modes = modes.min(self.len());
        Self {
            mean: self.mean.clone(),
            eigenvalues: self.eigenvalues[..modes].to_vec(),
            eigenfields: match &self.eigenfields {
                Eigenfields::Coordinate(idx) => Eigenfields::Coordinate(idx[..modes].to_vec()),
                Eigenfields::Dense(f) => Eigenfields::Dense(f[..modes].to_vec()),
            },
        }
    }

    /// Maps a cosine-basis measure onto the cell centers of a nodal grid,
    /// with a constant mean.
    ///
    /// Sampled cosines stay exactly orthonormal in the grid inner product as
    /// long as the wavenumbers stay below `cells_per_side`.
    pub fn onto_grid(&self, cells_per_side: usize, mean_value: f64) -> Result<Self> {
        let basis = *self.basis();
        let Basis::CosineTensor2d {
            modes_per_side,
            side,
        } = basis
        else {
            return Err(Error::BasisMismatch {
                expected: "cosine-tensor-2d".into(),
                found: basis.to_string(),
            });
        };
        if modes_per_side > cells_per_side {
            return Err(Error::InvalidParameter(format!(
                "{modes_per_side} cosine modes per side cannot be resolved on {cells_per_side} cells"
            )));
        }
        let grid = Basis::NodalGrid2d {
            cells_per_side,
            side,
        };
        let table = cosine_table(modes_per_side, cells_per_side, side);
        let modes = basis.cosine_modes();
        let fields = (0..self.len())
            .map(|j| {
                let idx = match &self.eigenfields {
                    Eigenfields::Coordinate(idx) => idx[j],
                    Eigenfields::Dense(_) => unreachable!("cosine measures are diagonal"),
                };
                let (k1, k2) = modes[idx];
                let (cx, cy) = (&table[k1], &table[k2]);
                let mut values = Vec::with_capacity(cells_per_side * cells_per_side);
                for y in cy {
                    values.extend(cx.iter().map(|x| x * y));
                }
                Field::new(grid, values)
            })
            .collect::<Result<Vec<_>>>()?;
        let mean_field = self.mean.cosine_to_grid(cells_per_side)?;
        let shift = Field::constant(grid, mean_value)?;
        GaussianMeasure::from_eigenpairs(mean_field.add(&shift)?, self.eigenvalues.clone(), fields)
    }
}

/// Prior `β (−d²/dx²)^{-1}` with Dirichlet conditions on `(0, π)`: `λ_k = β / k²`.
pub fn covariance_elliptic(beta: f64, modes: usize) -> Result<GaussianMeasure> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
    }
    if modes == 0 {
        return Err(Error::InvalidParameter("need at least one sine mode".into()));
    }
    let eigenvalues = (1..=modes).map(|k| beta / (k * k) as f64).collect();
    GaussianMeasure::diagonal(Field::zeros(Basis::sine(modes)), eigenvalues, (0..modes).collect())
}

/// Prior `β L^{-α}` with `L` the zero-mean Neumann Laplacian on `[0, 6]²`.
///
/// Modes are `(k1, k2) ≠ (0, 0)` with `0 <= k1, k2 < modes_per_side`, ordered
/// by descending eigenvalue and lexicographically among equal eigenvalues.
pub fn covariance_darcy(beta: f64, alpha: f64, modes_per_side: usize) -> Result<GaussianMeasure> {
    if !(alpha > 1.0) {
        return Err(Error::AlphaTooSmall(alpha));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
    }
    if modes_per_side < 2 {
        return Err(Error::InvalidParameter("need at least two cosine modes per side".into()));
    }
    let basis = Basis::cosine(modes_per_side);
    let mut modes: Vec<(usize, (usize, usize))> = basis.cosine_modes().into_iter().enumerate().collect();
    // |k|² ascending is eigenvalue descending; integer keys keep ties exact
    modes.sort_by_key(|&(_, (k1, k2))| (k1 * k1 + k2 * k2, k1, k2));
    let scale = (PI / DARCY_SIDE).powi(2);
    let eigenvalues = modes
        .iter()
        .map(|&(_, (k1, k2))| beta * (scale * (k1 * k1 + k2 * k2) as f64).powf(-alpha))
        .collect();
    let indices = modes.iter().map(|&(i, _)| i).collect();
    GaussianMeasure::diagonal(Field::zeros(basis), eigenvalues, indices)
}

/// One draw from the measure.
pub fn sample_prior(measure: &GaussianMeasure, stream: &RandomStream) -> Field {
    let xi = gaussian_draws(stream, measure.len());
    measure
        .synthesize(&xi)
        .expect("draw count matches the number of modes")
}

/// Karhunen-Loève ensemble `ψ_j = mean + sqrt(λ_j) φ_j`, `j = 1..=size`.
pub fn kl_ensemble(measure: &GaussianMeasure, size: usize) -> Result<Subspace> {
    if size > measure.len() {
        return Err(Error::TooFewModes {
            requested: size,
            available: measure.len(),
        });
    }
    let members = (0..size)
        .map(|j| {
            let mut psi = measure.mean().clone();
            psi.axpy(measure.eigenvalues()[j].sqrt(), &measure.eigenfield(j))?;
            Ok(psi)
        })
        .collect::<Result<Vec<_>>>()?;
    Subspace::new(members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Purpose;

    #[test]
    fn elliptic_spectrum() {
        let m = covariance_elliptic(10.0, 16).unwrap();
        assert_eq!(m.eigenvalues()[0], 10.0);
        assert_eq!(m.eigenvalues()[1], 2.5);
        assert!(m.eigenvalues().windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn darcy_spectrum_leading_modes() {
        let m = covariance_darcy(0.5, 1.3, 8).unwrap();
        let expected = 0.5 * ((PI / 6.0).powi(2)).powf(-1.3);
        assert!((m.eigenvalues()[0] - expected).abs() < 1e-12 * expected);
        // (0,1) and (1,0) tie; lexicographic order puts (0,1) first
        assert_eq!(m.eigenvalues()[0], m.eigenvalues()[1]);
        let basis = *m.basis();
        let first = m.eigenfield(0);
        assert_eq!(first.coeffs()[basis.cosine_index(0, 1).unwrap()], 1.0);
        let second = m.eigenfield(1);
        assert_eq!(second.coeffs()[basis.cosine_index(1, 0).unwrap()], 1.0);
        assert!(m.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn darcy_requires_trace_class_exponent() {
        assert!(matches!(covariance_darcy(0.5, 1.0, 4), Err(Error::AlphaTooSmall(_))));
        assert!(covariance_darcy(0.5, 1.0001, 4).is_ok());
    }

    #[test]
    fn degenerate_measure_samples_its_mean() {
        let mean = Field::new(Basis::sine(3), vec![1.0, 2.0, 3.0]).unwrap();
        let m = GaussianMeasure::diagonal(mean.clone(), vec![], vec![]).unwrap();
        let s = RandomStream::new(0, Purpose::Test, 0, 0);
        assert_eq!(sample_prior(&m, &s), mean);
    }

    #[test]
    fn kl_members_follow_spectrum() {
        let m = covariance_elliptic(10.0, 8).unwrap();
        let a = kl_ensemble(&m, 3).unwrap();
        let expected = [10.0_f64.sqrt(), 2.5_f64.sqrt(), (10.0_f64 / 9.0).sqrt()];
        for (j, member) in a.members().iter().enumerate() {
            for (k, &c) in member.coeffs().iter().enumerate() {
                let want = if k == j { expected[j] } else { 0.0 };
                assert!((c - want).abs() < 1e-15);
            }
        }
        assert!(matches!(kl_ensemble(&m, 9), Err(Error::TooFewModes { .. })));
    }

    #[test]
    fn grid_measure_is_orthonormal() {
        let m = covariance_darcy(0.5, 1.3, 6).unwrap().onto_grid(8, 4.0).unwrap();
        assert!(m.orthonormality_defect() < 1e-10);
        assert!(m.mean().coeffs().iter().all(|&v| (v - 4.0).abs() < 1e-15));
        assert!(covariance_darcy(0.5, 1.3, 9).unwrap().onto_grid(8, 4.0).is_err());
    }

    #[test]
    fn analysis_inverts_synthesis() {
        let m = covariance_darcy(0.5, 1.3, 5).unwrap().onto_grid(6, 4.0).unwrap();
        let xi: Vec<f64> = (0..m.len()).map(|j| (j as f64 * 0.9).sin()).collect();
        let u = m.synthesize(&xi).unwrap();
        let back = m.kl_coordinates(&u).unwrap();
        for j in 0..m.len() {
            assert!((back[j] - xi[j] * m.eigenvalues()[j].sqrt()).abs() < 1e-10);
        }
    }
}
