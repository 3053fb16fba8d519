use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::basis::{cosine_table, Basis};
use crate::numerics::{axpy, dot};

/// A function stored as coefficients in a [`Basis`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawField")]
pub struct Field {
    basis: Basis,
    coeffs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawField {
    basis: Basis,
    coeffs: Vec<f64>,
}

impl TryFrom<RawField> for Field {
    type Error = Error;

    fn try_from(raw: RawField) -> Result<Self> {
        Field::new(raw.basis, raw.coeffs)
    }
}

impl Field {
    pub fn new(basis: Basis, coeffs: Vec<f64>) -> Result<Self> {
        if !basis.is_valid() {
            return Err(Error::InvalidParameter(format!("invalid basis {basis}")));
        }
        if coeffs.len() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for basis {basis} of dimension {}",
                coeffs.len(),
                basis.dim()
            )));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite coefficient {bad}")));
        }
        Ok(Self { basis, coeffs })
    }

    pub fn zeros(basis: Basis) -> Self {
        Self {
            coeffs: vec![0.0; basis.dim()],
            basis,
        }
    }

    /// Constant function on a nodal grid.
    pub fn constant(basis: Basis, value: f64) -> Result<Self> {
        match basis {
            Basis::NodalGrid2d { .. } => Field::new(basis, vec![value; basis.dim()]),
            _ if value == 0.0 => Ok(Field::zeros(basis)),
            _ => Err(Error::InvalidParameter(format!(
                "basis {basis} cannot represent the constant {value}"
            ))),
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn ensure_same_basis(&self, other: &Field) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch {
                expected: self.basis.to_string(),
                found: other.basis.to_string(),
            });
        }
        Ok(())
    }

    /// L² inner product.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.ensure_same_basis(other)?;
        Ok(self.basis.l2_weight() * dot(&self.coeffs, &other.coeffs))
    }

    /// L² norm.
    pub fn norm(&self) -> f64 {
        (self.basis.l2_weight() * dot(&self.coeffs, &self.coeffs)).sqrt()
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: f64, x: &Field) -> Result<()> {
        self.ensure_same_basis(x)?;
        axpy(alpha, &x.coeffs, &mut self.coeffs);
        Ok(())
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn scaled(&self, factor: f64) -> Field {
        Field {
            basis: self.basis,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `Σ weights[j] · fields[j]`.
    pub fn linear_combination(fields: &[Field], weights: &[f64]) -> Result<Field> {
        let first = fields
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty linear combination".into()))?;
        if weights.len() != fields.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} fields",
                weights.len(),
                fields.len()
            )));
        }
        let mut out = Field::zeros(first.basis);
        for (f, &w) in fields.iter().zip(weights) {
            out.axpy(w, f)?;
        }
        Ok(out)
    }

    /// Arithmetic mean of a non-empty set of fields.
    pub fn mean(fields: &[Field]) -> Result<Field> {
        let n = fields.len() as f64;
        Field::linear_combination(fields, &vec![1.0 / n; fields.len()])
    }

    /// `‖self − truth‖ / ‖truth‖`.
    pub fn relative_error(&self, truth: &Field) -> Result<f64> {
        Ok(self.sub(truth)?.norm() / truth.norm())
    }

    /// Evaluates a cosine-basis field at the cell centers of a nodal grid.
    pub fn cosine_to_grid(&self, cells_per_side: usize) -> Result<Field> {
        let Basis::CosineTensor2d {
            modes_per_side,
            side,
        } = self.basis
        else {
            return Err(Error::BasisMismatch {
                expected: "cosine-tensor-2d".into(),
                found: self.basis.to_string(),
            });
        };
        let m = cells_per_side;
        let table = cosine_table(modes_per_side, m, side);
        // values[j][i] = Σ_{k1,k2} a_{k1 k2} c_{k1}(x_i) c_{k2}(y_j), done as two passes
        let mut partial = vec![vec![0.0; m]; modes_per_side]; // [k2][i]
        for (idx, (k1, k2)) in self.basis.cosine_modes().into_iter().enumerate() {
            axpy(self.coeffs[idx], &table[k1], &mut partial[k2]);
        }
        let mut values = vec![0.0; m * m];
        for j in 0..m {
            let row = &mut values[j * m..(j + 1) * m];
            for (k2, part) in partial.iter().enumerate() {
                axpy(table[k2][j], part, row);
            }
        }
        Field::new(
            Basis::NodalGrid2d {
                cells_per_side: m,
                side,
            },
            values,
        )
    }
}
