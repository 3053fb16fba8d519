//! Ensemble Kalman inversion of the 1D elliptic problem from 25 prior draws,
//! stopped by the discrepancy principle.
//!
//! ```bash
//! cargo run --release --example elliptic_inversion
//! ```

use eki::eki::{run, ErrorReference, StoppingRule};
use eki::field::{covariance_elliptic, sample_prior, Subspace, WeightedNorm};
use eki::forward::{forward_response, EllipticModel};
use eki::numerics::{Purpose, RandomStream};

pub fn run_example() -> eki::Result<()> {
    let (beta, gamma, modes, j, seed) = (10.0, 0.01, 512, 25, 11);
    let model = EllipticModel::new(modes)?;
    let prior = covariance_elliptic(beta, modes)?;
    let noise = WeightedNorm::white(gamma)?;

    let truth = sample_prior(&prior, &RandomStream::new(seed, Purpose::Truth, 0, 0));
    let eta = noise.sample(&RandomStream::new(seed, Purpose::TruthNoise, 0, 0), modes)?;
    let y: Vec<f64> = forward_response(&model, &truth)?
        .iter()
        .zip(&eta)
        .map(|(g, e)| g + e)
        .collect();

    let members = (0..j)
        .map(|m| sample_prior(&prior, &RandomStream::new(seed, Purpose::Ensemble, m, 0)))
        .collect();
    let a = Subspace::new(members)?;
    let rule = StoppingRule::with_noise_level(noise.norm(&eta)?)?;
    let reference = ErrorReference::relative(truth);
    let out = run(
        &a,
        &model,
        &y,
        &noise,
        &rule,
        &RandomStream::new(seed, Purpose::Perturbation, 0, 0),
        Some(&reference),
    )?;

    println!("noise level {:.3}, stopping threshold {:.3}", rule.noise_level, rule.threshold());
    println!("{:>4} {:>12} {:>10}", "n", "misfit", "rel error");
    for d in &out.history {
        println!("{:>4} {:>12.3} {:>10.4}", d.iteration, d.misfit, d.relative_error.unwrap_or(f64::NAN));
    }
    match out.stopping_iteration {
        Some(n) => println!("discrepancy met at n = {n}"),
        None => println!("not converged after {} iterations", rule.max_iterations),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> eki::Result<()> {
    run_example()
}
