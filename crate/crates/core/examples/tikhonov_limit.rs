//! One analysis step from an ensemble of J prior draws approaches the
//! Tikhonov-Phillips solution as J grows.
//!
//! ```bash
//! cargo run --release --example tikhonov_limit
//! ```

use eki::baselines::tikhonov_linear;
use eki::eki::EkiState;
use eki::field::{covariance_elliptic, sample_prior, Field, WeightedNorm};
use eki::forward::{forward_response, EllipticModel};
use eki::numerics::{Purpose, RandomStream};

pub fn run_example() -> eki::Result<()> {
    let (modes, seed) = (128, 2);
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
    let u_tp = tikhonov_linear(&model, &prior, &y, &noise)?;

    println!("{:>6} {:>14}", "J", "||u - u_TP||/||u_TP||");
    for j in [10, 100, 1000, 4000] {
        let members: Vec<Field> = (0..j)
            .map(|k| sample_prior(&prior, &RandomStream::new(seed, Purpose::Ensemble, k, 0)))
            .collect();
        let mut state = EkiState::from_fields(&members, &model)?;
        state.analyze(&y, &noise, &RandomStream::new(seed, Purpose::Perturbation, 0, 0), true)?;
        let dist = state.estimate().sub(&u_tp)?.norm() / u_tp.norm();
        println!("{j:>6} {dist:>14.4}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> eki::Result<()> {
    run_example()
}
