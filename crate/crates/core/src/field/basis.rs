use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Side length of the square groundwater domain `[0, 6]²`.
pub const DARCY_SIDE: f64 = 6.0;

/// Coefficient space a [`Field`](super::Field) lives in.
///
/// The two spectral kinds are orthonormal in L², so inner products are plain
/// dot products of coefficients. The nodal kind stores cell-center values on a
/// uniform grid and weights the dot product by the cell area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Basis {
    /// `sqrt(2/π) sin(kx)` on `(0, π)`, `k = 1..=modes`.
    Sine1d { modes: usize },
    /// Products of normalized Neumann cosines on `[0, side]²` with
    /// `0 <= k1, k2 < modes_per_side`, the constant mode excluded.
    CosineTensor2d { modes_per_side: usize, side: f64 },
    /// Cell-center values on a `cells_per_side²` grid over `[0, side]²`,
    /// x index fastest.
    NodalGrid2d { cells_per_side: usize, side: f64 },
}

impl Basis {
    pub fn sine(modes: usize) -> Self {
        Basis::Sine1d { modes }
    }

    pub fn cosine(modes_per_side: usize) -> Self {
        Basis::CosineTensor2d {
            modes_per_side,
            side: DARCY_SIDE,
        }
    }

    pub fn nodal(cells_per_side: usize) -> Self {
        Basis::NodalGrid2d {
            cells_per_side,
            side: DARCY_SIDE,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Basis::Sine1d { modes } => modes,
            Basis::CosineTensor2d { modes_per_side, .. } => {
                (modes_per_side * modes_per_side).saturating_sub(1)
            }
            Basis::NodalGrid2d { cells_per_side, .. } => cells_per_side * cells_per_side,
        }
    }

    /// Factor turning the coefficient dot product into the L² inner product.
    pub fn l2_weight(&self) -> f64 {
        match *self {
            Basis::Sine1d { .. } | Basis::CosineTensor2d { .. } => 1.0,
            Basis::NodalGrid2d {
                cells_per_side,
                side,
            } => (side / cells_per_side as f64).powi(2),
        }
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            Basis::Sine1d { modes } => modes >= 1,
            Basis::CosineTensor2d {
                modes_per_side,
                side,
            } => modes_per_side >= 2 && side > 0.0,
            Basis::NodalGrid2d {
                cells_per_side,
                side,
            } => cells_per_side >= 1 && side > 0.0,
        }
    }

    /// Wavenumber pairs of a cosine basis in coefficient order
    /// (lexicographic, constant mode skipped).
    pub fn cosine_modes(&self) -> Vec<(usize, usize)> {
        match *self {
            Basis::CosineTensor2d { modes_per_side, .. } => (0..modes_per_side)
                .flat_map(|k1| (0..modes_per_side).map(move |k2| (k1, k2)))
                .filter(|&k| k != (0, 0))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Coefficient index of cosine mode `(k1, k2)`.
    pub fn cosine_index(&self, k1: usize, k2: usize) -> Option<usize> {
        match *self {
            Basis::CosineTensor2d { modes_per_side, .. }
                if k1 < modes_per_side && k2 < modes_per_side && (k1, k2) != (0, 0) =>
            {
                Some(k1 * modes_per_side + k2 - 1)
            }
            _ => None,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Basis::Sine1d { modes } => write!(f, "sine-1d({modes})"),
            Basis::CosineTensor2d {
                modes_per_side,
                side,
            } => write!(f, "cosine-tensor-2d({modes_per_side}x{modes_per_side} on [0,{side}]^2)"),
            Basis::NodalGrid2d {
                cells_per_side,
                side,
            } => write!(f, "nodal-grid-2d({cells_per_side}x{cells_per_side} on [0,{side}]^2)"),
        }
    }
}

/// Normalized 1D Neumann cosine `n_k cos(π k x / side)` sampled at the
/// centers of `cells` uniform cells; row `k` of the returned table.
pub(crate) fn cosine_table(modes: usize, cells: usize, side: f64) -> Vec<Vec<f64>> {
    let h = side / cells as f64;
    (0..modes)
        .map(|k| {
            let norm = if k == 0 { (1.0 / side).sqrt() } else { (2.0 / side).sqrt() };
            (0..cells)
                .map(|i| norm * (PI * k as f64 * (i as f64 + 0.5) * h / side).cos())
                .collect()
        })
        .collect()
}

/// Orthonormal sine mode `sqrt(2/π) sin(kx)`.
pub fn sine_mode(k: usize, x: f64) -> f64 {
    (2.0 / PI).sqrt() * (k as f64 * x).sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(Basis::sine(7).dim(), 7);
        assert_eq!(Basis::cosine(4).dim(), 15);
        assert_eq!(Basis::nodal(8).dim(), 64);
    }

    #[test]
    fn cosine_index_matches_mode_list() {
        let b = Basis::cosine(5);
        for (idx, (k1, k2)) in b.cosine_modes().into_iter().enumerate() {
            assert_eq!(b.cosine_index(k1, k2), Some(idx));
        }
        assert_eq!(b.cosine_index(0, 0), None);
        assert_eq!(b.cosine_index(5, 0), None);
    }

    #[test]
    fn discrete_cosines_are_orthonormal_below_grid_resolution() {
        let cells = 16;
        let h = DARCY_SIDE / cells as f64;
        let t = cosine_table(cells, cells, DARCY_SIDE);
        for a in 0..cells {
            for b in 0..cells {
                let ip: f64 = h * t[a].iter().zip(&t[b]).map(|(x, y)| x * y).sum::<f64>();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-12, "({a},{b}) -> {ip}");
            }
        }
    }
}
