use crate::error::{Error, Result};
use crate::numerics::matrix::dot;

/// Symmetric banded matrix; only the lower band is stored.
#[derive(Debug, Clone)]
pub struct BandedSpd {
    n: usize,
    bandwidth: usize,
    band: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            bandwidth,
            band: vec![0.0; n * (bandwidth + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        (hi - lo <= self.bandwidth).then(|| hi * (self.bandwidth + 1) + lo + self.bandwidth - hi)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.band[s])
    }

    /// Adds `v` to entry `(i, j)` (and implicitly `(j, i)`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside bandwidth {}", self.bandwidth));
        self.band[s] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bandwidth);
            for j in lo..=i {
                let a = self.get(i, j);
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    pub fn factor(&self) -> Result<BandedCholesky> {
        let n = self.n;
        let w = self.bandwidth;
        let stride = w + 1;
        let mut l = vec![0.0; n * stride];
        for i in 0..n {
            let lo_i = i.saturating_sub(w);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(w));
                let row_i = &l[i * stride + lo + w - i..i * stride + j + w - i];
                let row_j = &l[j * stride + lo + w - j..j * stride + j + w - j];
                let s = self.band[i * stride + j + w - i] - dot(row_i, row_j);
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotSpd { row: i, pivot: s });
                    }
                    l[i * stride + w] = s.sqrt();
                } else {
                    l[i * stride + j + w - i] = s / l[j * stride + w];
                }
            }
        }
        Ok(BandedCholesky {
            n,
            bandwidth: w,
            lower: l,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bandwidth: usize,
    lower: Vec<f64>,
}

impl BandedCholesky {
    fn l(&self, i: usize, j: usize) -> f64 {
        self.lower[i * (self.bandwidth + 1) + j + self.bandwidth - i]
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for banded system of size {}",
                b.len(),
                self.n
            )));
        }
        let w = self.bandwidth;
        let mut x = b.to_vec();
        for i in 0..self.n {
            let lo = i.saturating_sub(w);
            let s: f64 = (lo..i).map(|k| self.l(i, k) * x[k]).sum();
            x[i] = (x[i] - s) / self.l(i, i);
        }
        for i in (0..self.n).rev() {
            let hi = (i + w).min(self.n - 1);
            let s: f64 = ((i + 1)..=hi).map(|k| self.l(k, i) * x[k]).sum();
            x[i] = (x[i] - s) / self.l(i, i);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{spd_solve, DenseMatrix};

    #[test]
    fn matches_dense_solve_on_laplacian_like_band() {
        let n = 12;
        let w = 3;
        let mut a = BandedSpd::zeros(n, w);
        let mut dense = DenseMatrix::zeros(n, n);
        for i in 0..n {
            let diag = 4.5 + 0.1 * i as f64;
            a.add(i, i, diag);
            dense[(i, i)] = diag;
            for d in [1, w] {
                if i >= d {
                    let v = -1.0;
                    a.add(i, i - d, v);
                    dense[(i, i - d)] = v;
                    dense[(i - d, i)] = v;
                }
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).cos()).collect();
        let x = a.factor().unwrap().solve(&b).unwrap();
        let rhs = DenseMatrix::from_row_major(n, 1, b.clone()).unwrap();
        let xd = spd_solve(&dense, &rhs).unwrap();
        for i in 0..n {
            assert!((x[i] - xd.as_slice()[i]).abs() < 1e-12);
        }
        let ax = a.mul_vec(&x);
        for i in 0..n {
            assert!((ax[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_band_fails() {
        let mut a = BandedSpd::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(1, 0, 2.0);
        assert!(matches!(a.factor(), Err(Error::NotSpd { .. })));
    }
}
