//! TCD checks along a flat translation, where the reduced condition is sharp
//! at N' = 2, and a K > 0 run that trips the coefficient blowup.

use lorot::curvature::{check_tcd, CheckContext, ConditionSpec, Variant};
use lorot::geodesics::minkowski_oracle;
use lorot::spacetime::{build_grid_space, minkowski_kernel, Weight};
use lorot::transport::DiscreteMeasure;

fn main() -> lorot::Result<()> {
    let space = build_grid_space(&[[-0.5, 7.5], [-1.0, 1.0]], &[64, 64], Weight::Zero)?;
    let oracle = minkowski_oracle(minkowski_kernel(1));
    let ctx = CheckContext::new(&oracle, &space);
    let mu0 = DiscreteMeasure::uniform_on_box(&space, &[-0.5, -0.5], &[0.5, 0.5], 1)?;
    let mu1 = DiscreteMeasure::uniform_on_box(&space, &[3.5, -0.5], &[4.5, 0.5], 1)?;
    for (variant, k) in [
        (Variant::TcdReduced, 0.0),
        (Variant::TcdFull, -1.0),
        (Variant::TcdEntropic, 0.0),
        (Variant::PathwiseReduced, 0.0),
        (Variant::TcdReduced, 10.0),
    ] {
        let spec = ConditionSpec::new(variant, k, 2.0, 0.5)?.with_nprime_grid(&[2.0, 3.0, 10.0])?;
        let report = check_tcd(&mu0, &mu1, &spec, &ctx)?;
        println!(
            "{variant:?} K={k}: pass={} worst margin={} notes={:?}",
            report.pass, report.worst_margin, report.notes
        );
    }
    Ok(())
}
