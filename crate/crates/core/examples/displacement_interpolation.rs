//! Geodesic plans, interpolants and restriction.

use lorot::geodesics::{build_plan, default_grid, interpolate, minkowski_oracle, restrict_plan, GeodesicOracle};
use lorot::spacetime::{build_grid_space, minkowski_kernel, Weight};
use lorot::transport::{solve_lp_optimal, DiscreteMeasure};

fn main() -> lorot::Result<()> {
    let space = build_grid_space(&[[-0.5, 5.5], [-1.5, 1.5]], &[24, 12], Weight::Zero)?;
    let oracle = minkowski_oracle(minkowski_kernel(1));
    let mu0 = DiscreteMeasure::uniform_on_box(&space, &[-0.5, -0.5], &[0.5, 0.5], 1)?;
    let mu1 = DiscreteMeasure::uniform_on_box(&space, &[3.5, -1.0], &[4.5, 1.0], 1)?;
    let result = solve_lp_optimal(&mu0, &mu1, 0.5, oracle.kernel())?;
    let plan = build_plan(&mu0, &mu1, &result, &oracle, &default_grid())?;
    println!("{} curves, l_p = {:.6}", plan.pairs.len(), result.objective.to_f64());
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let mu = interpolate(&plan, t)?;
        let mean_time: f64 = mu.atoms.iter().zip(&mu.weights).map(|(a, w)| a.time() * w).sum();
        println!("t = {t}: {} atoms, mean time {mean_time:.4}", mu.len());
    }
    let middle = restrict_plan(&plan, 0.25, 0.75)?;
    let ends = (interpolate(&middle, 0.0)?, interpolate(&middle, 1.0)?);
    let sub = solve_lp_optimal(&ends.0, &ends.1, 0.5, oracle.kernel())?;
    println!("restricted to [1/4, 3/4]: l_p = {:.6} (half of the full value)", sub.objective.to_f64());
    Ok(())
}
