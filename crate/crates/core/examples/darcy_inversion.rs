//! Recovering log-permeability from head at 100 wells: ensemble Kalman
//! inversion against Levenberg-Marquardt least squares and the best
//! approximation in the same subspace.
//!
//! ```bash
//! cargo run --release --example darcy_inversion
//! ```

use eki::baselines::{best_approximation, subspace_ls, LsSettings, Regularization};
use eki::eki::{run, ErrorReference, StoppingRule};
use eki::field::{covariance_darcy, sample_prior, Subspace, WeightedNorm};
use eki::forward::{forward_response, DarcyGrid, DarcyModel};
use eki::numerics::{Purpose, RandomStream};

pub fn run_example() -> eki::Result<()> {
    let (m, j, seed) = (24, 20, 3);
    let grid = DarcyGrid::new(m)?;
    let model = DarcyModel::with_lattice(grid, 10)?;
    let prior = covariance_darcy(0.5, 1.3, m)?.onto_grid(m, 4.0)?;
    let noise = WeightedNorm::white(7.0)?;

    let truth = sample_prior(&prior, &RandomStream::new(seed, Purpose::Truth, 0, 0));
    let eta = noise.sample(&RandomStream::new(seed, Purpose::TruthNoise, 0, 0), 100)?;
    let y: Vec<f64> = forward_response(&model, &truth)?
        .iter()
        .zip(&eta)
        .map(|(g, e)| g + e)
        .collect();

    let a = Subspace::new(
        (0..j)
            .map(|k| sample_prior(&prior, &RandomStream::new(seed, Purpose::Ensemble, k, 0)))
            .collect(),
    )?;
    let rule = StoppingRule::with_noise_level(noise.norm(&eta)?)?;
    let reference = ErrorReference::centered(truth.clone(), prior.mean())?;

    let enkf = run(
        &a,
        &model,
        &y,
        &noise,
        &rule,
        &RandomStream::new(seed, Purpose::Perturbation, 0, 0),
        Some(&reference),
    )?;
    let ls = subspace_ls(&model, &a, &y, &noise, &LsSettings::new(rule), Regularization::None)?;
    let ba = best_approximation(&a, &truth)?;

    println!("grid {m}x{m}, J = {j}, noise level {:.2}", rule.noise_level);
    println!(
        "EnKF: stopped at n = {:?}, misfit {:.2}, error {:.3}",
        enkf.stopping_iteration,
        enkf.history.last().map_or(f64::NAN, |d| d.misfit),
        reference.error(&enkf.estimate)?
    );
    println!(
        "LS:   {} LM iterations, {} forward solves, misfit {:.2}, error {:.3}",
        ls.iterations,
        ls.forward_solves,
        ls.misfit,
        reference.error(&ls.estimate)?
    );
    println!("BA:   error {:.3}", reference.error(&ba)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> eki::Result<()> {
    run_example()
}
