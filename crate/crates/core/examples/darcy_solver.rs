//! Steady Darcy flow on the benchmark aquifer: head for a constant and for a
//! random log-permeability, mass balance, and how strongly the wells see the
//! difference.
//!
//! ```bash
//! cargo run --release --example darcy_solver
//! ```

use eki::field::{covariance_darcy, sample_prior, Field};
use eki::forward::{forward_response, DarcyGrid, DarcyModel, ForwardModel};
use eki::numerics::{Purpose, RandomStream};

fn range(f: &Field) -> (f64, f64) {
    f.coeffs()
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

pub fn run_example() -> eki::Result<()> {
    let m = 32;
    let grid = DarcyGrid::new(m)?;
    let model = DarcyModel::with_lattice(grid, 10)?;
    let problem = model.problem();

    let flat = Field::constant(grid.basis(), 4.0)?;
    let head = model.head(&flat)?;
    let (lo, hi) = range(&head);
    let outflow = problem.dirichlet_outflow(&flat, &head)?;
    println!("u = 4 on a {m}x{m} grid: head in [{lo:.2}, {hi:.2}]");
    println!(
        "injected {:.6}, left through the bottom {:.6}",
        problem.injection(),
        outflow
    );

    let prior = covariance_darcy(0.5, 1.3, m)?.onto_grid(m, 4.0)?;
    let u = sample_prior(&prior, &RandomStream::new(1, Purpose::Truth, 0, 0));
    let (ulo, uhi) = range(&u);
    let deviation = u.sub(prior.mean())?.norm();
    println!("prior draw: u in [{ulo:.2}, {uhi:.2}], ||u - mean|| = {deviation:.3}");

    let (lo, hi) = range(&model.head(&u)?);
    println!("its head in [{lo:.2}, {hi:.2}]");

    let g_flat = forward_response(&model, &flat)?;
    let g_u = forward_response(&model, &u)?;
    let shift = g_flat
        .iter()
        .zip(&g_u)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let kappa = model.observation().size();
    println!(
        "wells: ||G(u) - G(4)|| = {shift:.2}, i.e. {:.2} in units of the noise norm 7 sqrt({kappa})",
        shift / (7.0 * (kappa as f64).sqrt())
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> eki::Result<()> {
    run_example()
}
