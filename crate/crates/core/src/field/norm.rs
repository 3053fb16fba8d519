use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gaussian_draws, RandomStream};

/// Norm `‖r‖_Γ = ‖Γ^{-1/2} r‖` for a diagonal covariance `Γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightedNorm {
    /// `Γ = γ² I`.
    White { variance: f64 },
    /// `Γ = diag(weights)`.
    Diagonal { weights: Vec<f64> },
}

impl WeightedNorm {
    /// White noise with standard deviation `gamma`.
    pub fn white(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise level gamma = {gamma} must be positive"
            )));
        }
        Ok(WeightedNorm::White {
            variance: gamma * gamma,
        })
    }

    pub fn diagonal(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter("covariance weights must be positive".into()));
        }
        Ok(WeightedNorm::Diagonal { weights })
    }

    fn check_len(&self, len: usize) -> Result<()> {
        match self {
            WeightedNorm::Diagonal { weights } if weights.len() != len => {
                Err(Error::DimensionMismatch(format!(
                    "vector of length {len} against {} covariance weights",
                    weights.len()
                )))
            }
            _ => Ok(()),
        }
    }

    /// Diagonal of `Γ` for data of length `len`.
    pub fn variances(&self, len: usize) -> Result<Vec<f64>> {
        self.check_len(len)?;
        Ok(match self {
            WeightedNorm::White { variance } => vec![*variance; len],
            WeightedNorm::Diagonal { weights } => weights.clone(),
        })
    }

    pub fn norm(&self, r: &[f64]) -> Result<f64> {
        self.check_len(r.len())?;
        let sum: f64 = match self {
            WeightedNorm::White { variance } => r.iter().map(|v| v * v).sum::<f64>() / variance,
            WeightedNorm::Diagonal { weights } => {
                r.iter().zip(weights).map(|(v, w)| v * v / w).sum()
            }
        };
        Ok(sum.sqrt())
    }

    /// `Γ^{-1/2} r`.
    pub fn whiten(&self, r: &[f64]) -> Result<Vec<f64>> {
        let var = self.variances(r.len())?;
        Ok(r.iter().zip(var).map(|(v, w)| v / w.sqrt()).collect())
    }

    /// One draw from `N(0, Γ)`.
    pub fn sample(&self, stream: &RandomStream, len: usize) -> Result<Vec<f64>> {
        let var = self.variances(len)?;
        Ok(gaussian_draws(stream, len)
            .into_iter()
            .zip(var)
            .map(|(z, w)| z * w.sqrt())
            .collect())
    }
}

/// Data misfit `‖y − G(u)‖_Γ`, the square root of the misfit functional.
pub fn weighted_misfit(y: &[f64], gu: &[f64], noise: &WeightedNorm) -> Result<f64> {
    if y.len() != gu.len() {
        return Err(Error::DimensionMismatch(format!(
            "data of length {} against prediction of length {}",
            y.len(),
            gu.len()
        )));
    }
    let r: Vec<f64> = y.iter().zip(gu).map(|(a, b)| a - b).collect();
    noise.norm(&r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_residual() {
        let g = WeightedNorm::white(0.3).unwrap();
        assert_eq!(weighted_misfit(&[1.0, 2.0], &[1.0, 2.0], &g).unwrap(), 0.0);
    }

    #[test]
    fn scalar_scaling() {
        let g = WeightedNorm::white(0.01).unwrap();
        let m = weighted_misfit(&[0.01, 0.0], &[0.0, 0.0], &g).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_componentwise_sum() {
        let w = vec![0.5, 2.0, 3.0, 0.25];
        let g = WeightedNorm::diagonal(w.clone()).unwrap();
        let y: [f64; 4] = [1.0, -2.0, 0.5, 4.0];
        let gu = [0.3, 0.1, -0.7, 2.0];
        let direct: f64 = (0..4).map(|i| (y[i] - gu[i]).powi(2) / w[i]).sum::<f64>().sqrt();
        assert!((weighted_misfit(&y, &gu, &g).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn length_mismatches() {
        let g = WeightedNorm::diagonal(vec![1.0; 3]).unwrap();
        assert!(weighted_misfit(&[1.0; 3], &[1.0; 2], &g).is_err());
        assert!(g.norm(&[1.0; 2]).is_err());
        assert!(WeightedNorm::white(0.0).is_err());
        assert!(WeightedNorm::diagonal(vec![1.0, -1.0]).is_err());
    }
}
