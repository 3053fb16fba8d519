use rayon::prelude::*;

use crate::eki::StoppingRule;
use crate::error::{Error, Result};
use crate::field::{weighted_misfit, Field, GaussianMeasure, Subspace, WeightedNorm};
use crate::forward::{forward_response, ForwardModel};
use crate::numerics::{dot, gemm, Cholesky, DenseMatrix, Op};

/// Damping beyond which a Levenberg-Marquardt search is abandoned.
const MAX_DAMPING: f64 = 1e12;

/// Levenberg-Marquardt controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsSettings {
    pub max_iterations: usize,
    pub initial_damping: f64,
    pub damping_up: f64,
    pub damping_down: f64,
    /// Relative forward-difference step: `h_j = fd_step · (1 + |c_j|)`.
    pub fd_step: f64,
    pub stopping: StoppingRule,
}

impl LsSettings {
    pub fn new(stopping: StoppingRule) -> Self {
        Self {
            max_iterations: 100,
            initial_damping: 1e-3,
            damping_up: 10.0,
            damping_down: 10.0,
            fd_step: 1e-6,
            stopping,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.initial_damping) || !positive(self.fd_step) {
            return Err(Error::InvalidParameter(
                "damping and finite-difference step must be positive".into(),
            ));
        }
        if !(self.damping_up > 1.0) || !(self.damping_down > 1.0) {
            return Err(Error::InvalidParameter("damping factors must exceed 1".into()));
        }
        Ok(())
    }
}

/// Regularization of the subspace least-squares problem.
#[derive(Debug, Clone, Copy)]
pub enum Regularization<'a> {
    /// Plain misfit, iterations stopped by the discrepancy principle.
    None,
    /// Misfit plus `‖u − ū‖²_C` for the given prior.
    Tikhonov(&'a GaussianMeasure),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsOutcome {
    pub estimate: Field,
    pub coeffs: Vec<f64>,
    /// `‖y − G(u)‖_Γ` at the returned point.
    pub misfit: f64,
    pub iterations: usize,
    pub converged: bool,
    pub forward_solves: usize,
}

struct Problem<'a> {
    model: &'a dyn ForwardModel,
    a: &'a Subspace,
    y: &'a [f64],
    noise: &'a WeightedNorm,
    reg: Regularization<'a>,
}

struct Point {
    coeffs: Vec<f64>,
    residual: Vec<f64>,
    misfit: f64,
}

impl Point {
    fn cost(&self) -> f64 {
        0.5 * dot(&self.residual, &self.residual)
    }
}

impl Problem<'_> {
    fn evaluate(&self, coeffs: Vec<f64>) -> Result<Point> {
        let u = self.a.combine(&coeffs)?;
        let gu = forward_response(self.model, &u)?;
        let diff: Vec<f64> = gu.iter().zip(self.y).map(|(g, y)| g - y).collect();
        let mut residual = self.noise.whiten(&diff)?;
        let misfit = dot(&residual, &residual).sqrt();
        if let Regularization::Tikhonov(prior) = self.reg {
            residual.extend(prior.whiten(&u)?);
        }
        if residual.iter().any(|r| !r.is_finite()) {
            return Err(Error::SolveFailure("non-finite least-squares residual".into()));
        }
        Ok(Point {
            coeffs,
            residual,
            misfit,
        })
    }

    /// Forward-difference Jacobian, one column per coefficient.
    fn jacobian(&self, at: &Point, fd_step: f64) -> Result<DenseMatrix> {
        let columns = (0..at.coeffs.len())
            .into_par_iter()
            .map(|k| {
                let h = fd_step * (1.0 + at.coeffs[k].abs());
                let mut c = at.coeffs.clone();
                c[k] += h;
                let shifted = self.evaluate(c)?;
                Ok(shifted
                    .residual
                    .iter()
                    .zip(&at.residual)
                    .map(|(a, b)| (a - b) / h)
                    .collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DenseMatrix::from_rows(&columns)?.transpose())
    }
}

/// Least squares over the span of `a`, by Levenberg-Marquardt on the
/// coefficients of its members.
///
/// The search starts from the member mean. Without regularization it stops as
/// soon as the misfit meets the discrepancy principle of `settings.stopping`.
pub fn subspace_ls(
    model: &dyn ForwardModel,
    a: &Subspace,
    y: &[f64],
    noise: &WeightedNorm,
    settings: &LsSettings,
    reg: Regularization,
) -> Result<LsOutcome> {
    settings.validate()?;
    let problem = Problem {
        model,
        a,
        y,
        noise,
        reg,
    };
    let j = a.len();
    let mut current = problem.evaluate(vec![1.0 / j as f64; j])?;
    let mut solves = 1;
    let mut damping = settings.initial_damping;
    let mut converged = false;
    let mut iterations = 0;
    let discrepancy = |p: &Point| matches!(reg, Regularization::None) && settings.stopping.is_met(p.misfit);

    while iterations < settings.max_iterations {
        if discrepancy(&current) || current.cost() == 0.0 {
            converged = true;
            break;
        }
        let jac = problem.jacobian(&current, settings.fd_step)?;
        solves += j;
        let jtj = gemm(1.0, &jac, Op::T, &jac, Op::N)?;
        let grad = jac.transpose().mul_vec(&current.residual)?;
        let scale: Vec<f64> = {
            let top = (0..j).map(|k| jtj[(k, k)]).fold(0.0, f64::max);
            (0..j).map(|k| jtj[(k, k)].max(1e-12 * top).max(f64::MIN_POSITIVE)).collect()
        };
        iterations += 1;
        loop {
            let mut system = jtj.clone();
            system.add_to_diagonal(&scale.iter().map(|s| damping * s).collect::<Vec<_>>());
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            let step = Cholesky::factor(&system)?.solve_vec(&rhs)?;
            // Decrease predicted by the local quadratic model.
            let jstep = jac.mul_vec(&step)?;
            let predicted = -(dot(&grad, &step) + 0.5 * dot(&jstep, &jstep));
            if predicted <= 1e-14 * current.cost() {
                converged = true;
                break;
            }
            let trial: Vec<f64> = current.coeffs.iter().zip(&step).map(|(c, s)| c + s).collect();
            let candidate = problem.evaluate(trial)?;
            solves += 1;
            if candidate.cost() < current.cost() {
                current = candidate;
                damping = (damping / settings.damping_down).max(1e-15);
                break;
            }
            damping *= settings.damping_up;
            if damping > MAX_DAMPING {
                return Err(Error::LmStalled {
                    damping,
                    iterations,
                });
            }
        }
        if converged {
            break;
        }
    }
    if !converged && discrepancy(&current) {
        converged = true;
    }
    let estimate = a.combine(&current.coeffs)?;
    let misfit = weighted_misfit(y, &forward_response(model, &estimate)?, noise)?;
    Ok(LsOutcome {
        estimate,
        coeffs: current.coeffs,
        misfit,
        iterations,
        converged,
        forward_solves: solves + 1,
    })
}
