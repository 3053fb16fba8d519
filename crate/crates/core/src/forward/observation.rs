use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Basis, Field};

/// How a state field is turned into a data vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ObservationSpec {
    /// The full coefficient vector.
    AllCoefficients { size: usize },
    /// Point values `(x, y)`, bilinearly interpolated from cell centers.
    PointValues { points: Vec<[f64; 2]> },
}

impl ObservationSpec {
    pub fn size(&self) -> usize {
        match self {
            ObservationSpec::AllCoefficients { size } => *size,
            ObservationSpec::PointValues { points } => points.len(),
        }
    }

    /// Point observations, checked against a square domain `[0, side]²`.
    pub fn points(points: Vec<[f64; 2]>, side: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("no observation points".into()));
        }
        if let Some(p) = points.iter().find(|p| !inside(p, side)) {
            return Err(Error::PointOutsideDomain(p[0], p[1]));
        }
        Ok(ObservationSpec::PointValues { points })
    }
}

fn inside(p: &[f64; 2], side: f64) -> bool {
    (0.0..=side).contains(&p[0]) && (0.0..=side).contains(&p[1])
}

/// Regular `per_side × per_side` lattice of wells at the centers of an
/// equal subdivision of `[0, side]²`, x index fastest.
pub fn well_lattice(per_side: usize, side: f64) -> Vec<[f64; 2]> {
    let spacing = side / per_side as f64;
    (1..=per_side)
        .flat_map(|j| {
            (1..=per_side).map(move |i| [(i as f64 - 0.5) * spacing, (j as f64 - 0.5) * spacing])
        })
        .collect()
}

/// Applies an observation spec to a state field.
pub fn observe(state: &Field, spec: &ObservationSpec) -> Result<Vec<f64>> {
    match spec {
        ObservationSpec::AllCoefficients { size } => {
            if *size != state.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "observing {size} coefficients of a field with {}",
                    state.dim()
                )));
            }
            Ok(state.coeffs().to_vec())
        }
        ObservationSpec::PointValues { points } => {
            let Basis::NodalGrid2d {
                cells_per_side,
                side,
            } = *state.basis()
            else {
                return Err(Error::BasisMismatch {
                    expected: "nodal-grid-2d".into(),
                    found: state.basis().to_string(),
                });
            };
            points
                .iter()
                .map(|p| {
                    if !inside(p, side) {
                        return Err(Error::PointOutsideDomain(p[0], p[1]));
                    }
                    Ok(bilinear(state.coeffs(), cells_per_side, side, p[0], p[1]))
                })
                .collect()
        }
    }
}

/// Bilinear interpolation between cell centers; constant beyond the outermost
/// centers.
fn bilinear(values: &[f64], m: usize, side: f64, x: f64, y: f64) -> f64 {
    let h = side / m as f64;
    let locate = |s: f64| -> (usize, usize, f64) {
        if m == 1 {
            return (0, 0, 0.0);
        }
        let f = (s / h - 0.5).clamp(0.0, (m - 1) as f64);
        let lo = (f.floor() as usize).min(m - 2);
        (lo, lo + 1, f - lo as f64)
    };
    let (i0, i1, tx) = locate(x);
    let (j0, j1, ty) = locate(y);
    let at = |i: usize, j: usize| values[j * m + i];
    (1.0 - ty) * ((1.0 - tx) * at(i0, j0) + tx * at(i1, j0))
        + ty * ((1.0 - tx) * at(i0, j1) + tx * at(i1, j1))
}
