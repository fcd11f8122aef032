//! Brunn–Minkowski for timelike separated squares and the Bonnet–Myers scan.

use lorot::curvature::{bonnet_myers_bound, brunn_minkowski, check_bonnet_myers, CheckContext};
use lorot::geodesics::{minkowski_oracle, GeodesicOracle};
use lorot::spacetime::{build_grid_space, minkowski_kernel, Weight};

fn main() -> lorot::Result<()> {
    let space = build_grid_space(&[[-1.0, 7.0], [-1.0, 1.0]], &[128, 128], Weight::Zero)?;
    let oracle = minkowski_oracle(minkowski_kernel(1));
    let ctx = CheckContext::new(&oracle, &space);
    let a0 = space.cells_in_box(&[-0.5, -0.5], &[0.5, 0.5]);
    for side in [1.0, 2.0] {
        let h = 0.5 * side;
        let a1 = space.cells_in_box(&[4.0 - h, -h], &[4.0 + h, h]);
        let r = brunn_minkowski(&a0, &a1, 0.5, 0.0, &[2.0, 4.0], 0.02, &ctx)?;
        println!("side {side}: m[A_1/2]^(1/2) = {:.4}, worst margin {}", r.quantities["measure_t"].sqrt(), r.worst_margin);
    }

    let (full, reduced) = bonnet_myers_bound(10.0, 2.0)?;
    println!("Bonnet-Myers K=10, N=2: full {full:.4}, reduced {reduced:.4}");
    let r = check_bonnet_myers(&space, oracle.kernel(), 10.0, 2.0)?;
    println!("flat window sup tau {:.4}: pass={}", r.quantities["sup_tau"], r.pass);
    Ok(())
}
