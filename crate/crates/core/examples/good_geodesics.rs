//! Dyadic bisection toward a geodesic with bounded densities.

use lorot::curvature::{good_geodesic_bisect, CheckContext};
use lorot::geodesics::{density_of, minkowski_oracle};
use lorot::spacetime::{build_grid_space, minkowski_kernel, Weight};
use lorot::transport::DiscreteMeasure;

fn main() -> lorot::Result<()> {
    let space = build_grid_space(&[[-1.0, 7.0], [-1.0, 1.0]], &[64, 64], Weight::Zero)?;
    let oracle = minkowski_oracle(minkowski_kernel(1));
    let ctx = CheckContext::new(&oracle, &space);
    let mu0 = DiscreteMeasure::uniform_on_box(&space, &[-0.5, -0.5], &[0.5, 0.5], 1)?;
    let mu1 = DiscreteMeasure::uniform_on_box(&space, &[3.0, -1.0], &[5.0, 1.0], 1)?;
    let g = good_geodesic_bisect(&mu0, &mu1, 0.5, -0.5, 2.0, 4, 0.05, &ctx)?;
    println!("threshold c = {:.4}", g.report.quantities["threshold"]);
    for (t, mu) in g.times.iter().zip(&g.measures) {
        println!("t = {t:<7} sup density {:.4}", density_of(mu, &space).sup());
    }
    println!("pass = {}, resolves = {}", g.report.pass, g.report.quantities["resolves"]);
    Ok(())
}
