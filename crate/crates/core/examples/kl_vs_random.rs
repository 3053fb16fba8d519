//! Random versus Karhunen-Loeve initial ensembles on the elliptic problem:
//! error and misfit curves over 30 iterations, run past the discrepancy
//! crossing to show semi-convergence.
//!
//! ```bash
//! cargo run --release --example kl_vs_random
//! ```

use eki::eki::{run, ErrorReference, StoppingRule};
use eki::field::{covariance_elliptic, kl_ensemble, sample_prior, Subspace, WeightedNorm};
use eki::forward::{forward_response, EllipticModel};
use eki::numerics::{Purpose, RandomStream};

pub fn run_example() -> eki::Result<()> {
    let (modes, seed) = (512, 5);
    let model = EllipticModel::new(modes)?;
    let prior = covariance_elliptic(10.0, modes)?;
    let noise = WeightedNorm::white(0.01)?;
    let truth = sample_prior(&prior, &RandomStream::new(seed, Purpose::Truth, 0, 0));
    let eta = noise.sample(&RandomStream::new(seed, Purpose::TruthNoise, 0, 0), modes)?;
    let y: Vec<f64> = forward_response(&model, &truth)?
        .iter()
        .zip(&eta)
        .map(|(g, e)| g + e)
        .collect();
    let rule = StoppingRule::with_noise_level(noise.norm(&eta)?)?.continuing();
    let reference = ErrorReference::relative(truth);
    let stream = RandomStream::new(seed, Purpose::Perturbation, 0, 0);

    let random = Subspace::new(
        (0..25)
            .map(|k| sample_prior(&prior, &RandomStream::new(seed, Purpose::Ensemble, k, 0)))
            .collect(),
    )?;
    let kl = kl_ensemble(&prior, 20)?;
    let r = run(&random, &model, &y, &noise, &rule, &stream, Some(&reference))?;
    let k = run(&kl, &model, &y, &noise, &rule, &stream, Some(&reference))?;

    println!("noise level {:.3}", rule.noise_level);
    println!("{:>3} {:>10} {:>10} {:>10} {:>10}", "n", "err R", "misfit R", "err KL", "misfit KL");
    for (a, b) in r.history.iter().zip(&k.history) {
        println!(
            "{:>3} {:>10.4} {:>10.2} {:>10.4} {:>10.2}",
            a.iteration,
            a.relative_error.unwrap_or(f64::NAN),
            a.misfit,
            b.relative_error.unwrap_or(f64::NAN),
            b.misfit
        );
    }
    println!(
        "discrepancy crossing: R at {:?}, KL at {:?}",
        r.stopping_iteration, k.stopping_iteration
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> eki::Result<()> {
    run_example()
}
