use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Basis, Field, DARCY_SIDE};
use crate::numerics::BandedSpd;

/// Benchmark head on the bottom edge.
pub const BOTTOM_HEAD: f64 = 100.0;
/// Benchmark inflow per unit length through the left edge.
pub const LEFT_INFLOW: f64 = 500.0;

/// Uniform cell-centered grid on `[0, 6]²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct DarcyGrid {
    cells: usize,
}

impl TryFrom<usize> for DarcyGrid {
    type Error = Error;
    fn try_from(m: usize) -> Result<Self> {
        DarcyGrid::new(m)
    }
}

impl From<DarcyGrid> for usize {
    fn from(g: DarcyGrid) -> usize {
        g.cells
    }
}

impl DarcyGrid {
    pub fn new(cells_per_side: usize) -> Result<Self> {
        if cells_per_side < 8 {
            return Err(Error::InvalidParameter(format!(
                "Darcy grid needs at least 8 cells per side, got {cells_per_side}"
            )));
        }
        Ok(Self {
            cells: cells_per_side,
        })
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells * self.cells
    }

    /// Cell width Δ.
    pub fn spacing(&self) -> f64 {
        DARCY_SIDE / self.cells as f64
    }

    pub fn basis(&self) -> Basis {
        Basis::nodal(self.cells)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.cells + i
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        let h = self.spacing();
        ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)
    }

    /// A function sampled at every cell center.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        let m = self.cells;
        let values = (0..m * m)
            .map(|idx| {
                let (x, y) = self.center(idx % m, idx / m);
                f(x, y)
            })
            .collect();
        Field::new(self.basis(), values).expect("grid samples match the grid basis")
    }
}

/// Piecewise source of the benchmark: zero below `y = 4`, then 137, then 274
/// from `y = 5`.
pub fn benchmark_source(_x: f64, y: f64) -> f64 {
    if y <= 4.0 {
        0.0
    } else if y < 5.0 {
        137.0
    } else {
        274.0
    }
}

/// Boundary treatment of the square.
#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    /// Head fixed on the bottom, prescribed inflow per unit length through the
    /// left edge, no flow through top and right.
    Benchmark { bottom_head: f64, left_inflow: f64 },
    /// Head prescribed at every boundary face midpoint, ordered by cell along
    /// each edge.
    Dirichlet {
        left: Vec<f64>,
        right: Vec<f64>,
        bottom: Vec<f64>,
        top: Vec<f64>,
    },
}

/// Steady Darcy problem `−∇·(e^u ∇h) = f` on a grid, without the
/// log-permeability.
#[derive(Debug, Clone, PartialEq)]
pub struct DarcyProblem {
    grid: DarcyGrid,
    source: Vec<f64>,
    boundary: Boundary,
}

/// Assembled cell-centered system `A h = b`.
#[derive(Debug, Clone)]
pub struct DarcySystem {
    pub matrix: BandedSpd,
    pub rhs: Vec<f64>,
}

impl DarcyProblem {
    pub fn benchmark(grid: DarcyGrid) -> Self {
        Self {
            grid,
            source: grid.sample(benchmark_source).into_coeffs(),
            boundary: Boundary::Benchmark {
                bottom_head: BOTTOM_HEAD,
                left_inflow: LEFT_INFLOW,
            },
        }
    }

    /// Head prescribed by `g` on the whole boundary.
    pub fn dirichlet(
        grid: DarcyGrid,
        source: impl Fn(f64, f64) -> f64,
        g: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let m = grid.cells;
        let h = grid.spacing();
        let along = |k: usize| (k as f64 + 0.5) * h;
        Self {
            grid,
            source: grid.sample(source).into_coeffs(),
            boundary: Boundary::Dirichlet {
                left: (0..m).map(|j| g(0.0, along(j))).collect(),
                right: (0..m).map(|j| g(DARCY_SIDE, along(j))).collect(),
                bottom: (0..m).map(|i| g(along(i), 0.0)).collect(),
                top: (0..m).map(|i| g(along(i), DARCY_SIDE)).collect(),
            },
        }
    }

    pub fn grid(&self) -> DarcyGrid {
        self.grid
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    fn conductivity(&self, log_k: &Field) -> Result<Vec<f64>> {
        let basis = self.grid.basis();
        if *log_k.basis() != basis {
            return Err(Error::BasisMismatch {
                expected: basis.to_string(),
                found: log_k.basis().to_string(),
            });
        }
        let k: Vec<f64> = log_k.coeffs().iter().map(|u| u.exp()).collect();
        if k.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::SolveFailure("permeability overflowed".into()));
        }
        Ok(k)
    }

    /// Five-point conservative system with harmonic-mean transmissibilities.
    pub fn assemble(&self, log_k: &Field) -> Result<DarcySystem> {
        let k = self.conductivity(log_k)?;
        let m = self.grid.cells;
        let h = self.grid.spacing();
        let n = m * m;
        let mut a = BandedSpd::zeros(n, m);
        let mut b: Vec<f64> = self.source.iter().map(|f| f * h * h).collect();
        for j in 0..m {
            for i in 0..m {
                let p = self.grid.index(i, j);
                if i + 1 < m {
                    couple(&mut a, p, p + 1, harmonic(k[p], k[p + 1]));
                }
                if j + 1 < m {
                    couple(&mut a, p, p + m, harmonic(k[p], k[p + m]));
                }
            }
        }
        match &self.boundary {
            Boundary::Benchmark {
                bottom_head,
                left_inflow,
            } => {
                for i in 0..m {
                    let p = self.grid.index(i, 0);
                    a.add(p, p, 2.0 * k[p]);
                    b[p] += 2.0 * k[p] * bottom_head;
                }
                for j in 0..m {
                    b[self.grid.index(0, j)] += left_inflow * h;
                }
            }
            Boundary::Dirichlet {
                left,
                right,
                bottom,
                top,
            } => {
                let mut face = |p: usize, g: f64| {
                    a.add(p, p, 2.0 * k[p]);
                    b[p] += 2.0 * k[p] * g;
                };
                for t in 0..m {
                    face(self.grid.index(0, t), left[t]);
                    face(self.grid.index(m - 1, t), right[t]);
                    face(self.grid.index(t, 0), bottom[t]);
                    face(self.grid.index(t, m - 1), top[t]);
                }
            }
        }
        Ok(DarcySystem { matrix: a, rhs: b })
    }

    /// Head at cell centers.
    pub fn solve(&self, log_k: &Field) -> Result<Field> {
        let sys = self.assemble(log_k)?;
        let chol = sys.matrix.factor().map_err(|e| match e {
            Error::NotSpd { row, pivot } => Error::SolveFailure(format!(
                "Darcy system not positive definite (row {row}, pivot {pivot:e})"
            )),
            other => other,
        })?;
        let head = chol.solve(&sys.rhs)?;
        if head.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolveFailure("non-finite head".into()));
        }
        Field::new(self.grid.basis(), head)
    }

    /// Total injection: source integrated over the cells plus boundary inflow.
    pub fn injection(&self) -> f64 {
        let h = self.grid.spacing();
        let sources: f64 = self.source.iter().sum::<f64>() * h * h;
        match &self.boundary {
            Boundary::Benchmark { left_inflow, .. } => sources + left_inflow * DARCY_SIDE,
            Boundary::Dirichlet { .. } => sources,
        }
    }

    /// Net flux leaving through the Dirichlet faces for a computed head.
    pub fn dirichlet_outflow(&self, log_k: &Field, head: &Field) -> Result<f64> {
        let k = self.conductivity(log_k)?;
        log_k.ensure_same_basis(head)?;
        let h = head.coeffs();
        let m = self.grid.cells;
        let idx = |i, j| self.grid.index(i, j);
        let flux = |p: usize, g: f64| 2.0 * k[p] * (h[p] - g);
        Ok(match &self.boundary {
            Boundary::Benchmark { bottom_head, .. } => {
                (0..m).map(|i| flux(idx(i, 0), *bottom_head)).sum()
            }
            Boundary::Dirichlet {
                left,
                right,
                bottom,
                top,
            } => (0..m)
                .map(|t| {
                    flux(idx(0, t), left[t])
                        + flux(idx(m - 1, t), right[t])
                        + flux(idx(t, 0), bottom[t])
                        + flux(idx(t, m - 1), top[t])
                })
                .sum(),
        })
    }
}

fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

fn couple(a: &mut BandedSpd, p: usize, q: usize, t: f64) {
    a.add(p, p, t);
    a.add(q, q, t);
    a.add(q, p, -t);
}

/// Head for the benchmark problem with log-permeability `u` at cell centers.
pub fn darcy_solve(u: &Field, grid: DarcyGrid) -> Result<Field> {
    DarcyProblem::benchmark(grid).solve(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn manufactured(m: usize) -> f64 {
        let grid = DarcyGrid::new(m).unwrap();
        let w = PI / 6.0;
        let exact = |x: f64, y: f64| (w * x).cos() * (w * y).cos();
        let problem = DarcyProblem::dirichlet(grid, |x, y| 2.0 * w * w * exact(x, y), exact);
        let head = problem.solve(&Field::zeros(grid.basis())).unwrap();
        let reference = grid.sample(exact);
        head.coeffs()
            .iter()
            .zip(reference.coeffs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn manufactured_solution_converges_at_second_order() {
        let order = (manufactured(32) / manufactured(64)).log2();
        assert!(order >= 1.8, "observed order {order}");
    }

    #[test]
    fn benchmark_flux_balance() {
        let grid = DarcyGrid::new(32).unwrap();
        let problem = DarcyProblem::benchmark(grid);
        let u = Field::constant(grid.basis(), 4.0).unwrap();
        let head = problem.solve(&u).unwrap();
        let out = problem.dirichlet_outflow(&u, &head).unwrap();
        let inj = problem.injection();
        assert!(((out - inj) / inj).abs() < 1e-8, "{out} vs {inj}");
    }

    #[test]
    fn flux_balance_with_rough_permeability() {
        let grid = DarcyGrid::new(16).unwrap();
        let problem = DarcyProblem::benchmark(grid);
        let u = grid.sample(|x, y| 4.0 + (2.0 * x).sin() * (1.3 * y).cos());
        let head = problem.solve(&u).unwrap();
        let out = problem.dirichlet_outflow(&u, &head).unwrap();
        assert!(((out - problem.injection()) / problem.injection()).abs() < 1e-8);
    }

    #[test]
    fn mirror_symmetry() {
        let grid = DarcyGrid::new(20).unwrap();
        let m = grid.cells_per_side();
        let problem = DarcyProblem::dirichlet(
            grid,
            |x, y| (x - 3.0).powi(2) + y,
            |x, y| 1.0 + (x - 3.0).abs() * y,
        );
        let u = grid.sample(|x, y| (0.7 * (x - 3.0)).cos() + 0.2 * y);
        let h = problem.solve(&u).unwrap();
        let h = h.coeffs();
        for j in 0..m {
            for i in 0..m {
                let d = (h[grid.index(i, j)] - h[grid.index(m - 1 - i, j)]).abs();
                assert!(d < 1e-10, "asymmetry {d} at ({i}, {j})");
            }
        }
    }

    #[test]
    fn assembled_matrix_is_symmetric() {
        let grid = DarcyGrid::new(10).unwrap();
        let u = grid.sample(|x, y| (x * y).sin());
        let sys = DarcyProblem::benchmark(grid).assemble(&u).unwrap();
        let n = grid.cell_count();
        for i in 0..n {
            for j in 0..n {
                assert!((sys.matrix.get(i, j) - sys.matrix.get(j, i)).abs() < 1e-12);
            }
        }
        assert!(sys.matrix.factor().is_ok());
    }

    #[test]
    fn higher_permeability_reduces_head_drop() {
        let grid = DarcyGrid::new(24).unwrap();
        let drop = |value: f64| {
            let h = darcy_solve(&Field::constant(grid.basis(), value).unwrap(), grid).unwrap();
            let c = h.coeffs();
            c.iter().cloned().fold(f64::MIN, f64::max) - c.iter().cloned().fold(f64::MAX, f64::min)
        };
        assert!(drop(4.0 + 10f64.ln()) < drop(4.0));
    }

    #[test]
    fn source_regions() {
        assert_eq!(benchmark_source(1.0, 4.0), 0.0);
        assert_eq!(benchmark_source(1.0, 4.5), 137.0);
        assert_eq!(benchmark_source(1.0, 5.0), 274.0);
    }

    #[test]
    fn grid_guards() {
        assert!(DarcyGrid::new(7).is_err());
        let grid = DarcyGrid::new(8).unwrap();
        assert!(matches!(
            darcy_solve(&Field::zeros(Basis::nodal(9)), grid),
            Err(Error::BasisMismatch { .. })
        ));
    }

    #[test]
    fn deterministic() {
        let grid = DarcyGrid::new(12).unwrap();
        let u = grid.sample(|x, y| 4.0 + 0.3 * (x - y).sin());
        assert_eq!(darcy_solve(&u, grid).unwrap(), darcy_solve(&u, grid).unwrap());
    }
}
