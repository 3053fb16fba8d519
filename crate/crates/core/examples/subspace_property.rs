//! Every ensemble Kalman iterate is a linear combination of the initial
//! members: project each member back onto the initial span and report the
//! largest relative residual per iteration.
//!
//! ```bash
//! cargo run --release --example subspace_property
//! ```

use eki::eki::EkiState;
use eki::field::{covariance_darcy, sample_prior, Subspace, WeightedNorm};
use eki::forward::{forward_response, DarcyGrid, DarcyModel};
use eki::numerics::{Purpose, RandomStream};

pub fn run_example() -> eki::Result<()> {
    let (m, j, seed) = (16, 5, 8);
    let grid = DarcyGrid::new(m)?;
    let model = DarcyModel::with_lattice(grid, 10)?;
    let prior = covariance_darcy(0.5, 1.3, m)?.onto_grid(m, 4.0)?;
    let noise = WeightedNorm::white(7.0)?;
    let truth = sample_prior(&prior, &RandomStream::new(seed, Purpose::Truth, 0, 0));
    let y = forward_response(&model, &truth)?;

    let a = Subspace::new(
        (0..j)
            .map(|k| sample_prior(&prior, &RandomStream::new(seed, Purpose::Ensemble, k, 0)))
            .collect(),
    )?;
    let mut state = EkiState::init(&a, &model)?;
    let stream = RandomStream::new(seed, Purpose::Perturbation, 0, 0);
    for _ in 0..10 {
        state.analyze(&y, &noise, &stream, true)?;
        state.predict(&model)?;
        let worst = state
            .members()
            .iter()
            .map(|u| Ok(a.project(u)?.residual_norm / u.norm()))
            .collect::<eki::Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("n = {:>2}: largest relative residual {worst:.2e}", state.iteration());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> eki::Result<()> {
    run_example()
}
