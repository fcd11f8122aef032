//! Rényi and Boltzmann entropies of cell densities.

use lorot::entropy::{boltzmann_entropy, excess_functional, renyi_entropy, u_n};
use lorot::geodesics::density_estimate;
use lorot::spacetime::{build_grid_space, Weight};
use lorot::transport::DiscreteMeasure;

fn main() -> lorot::Result<()> {
    let space = build_grid_space(&[[0.0, 4.0], [-2.0, 2.0]], &[32, 32], Weight::Zero)?;
    for side in [0.5, 1.0, 2.0] {
        let h = 0.5 * side;
        let mu = DiscreteMeasure::uniform_on_box(&space, &[2.0 - h, -h], &[2.0 + h, h], 1)?;
        let rho = density_estimate(&mu, &space)?;
        println!(
            "side {side}: S_2 = {:.4}, S_3 = {:.4}, Ent = {}, U_2 = {:.4}, F_1 = {:.4}",
            renyi_entropy(&rho, &space, 2.0)?,
            renyi_entropy(&rho, &space, 3.0)?,
            boltzmann_entropy(&rho, &space),
            u_n(&rho, &space, 2.0)?,
            excess_functional(&rho, &space, 1.0)?,
        );
    }
    Ok(())
}
