//! Contraction of a square toward a point in its chronological future.

use lorot::curvature::{check_tmcp, tmcp_good_geodesic, CheckContext, ConditionSpec, Variant};
use lorot::geodesics::minkowski_oracle;
use lorot::spacetime::{build_grid_space, minkowski_kernel, Event, Weight};
use lorot::transport::DiscreteMeasure;

fn main() -> lorot::Result<()> {
    let space = build_grid_space(&[[-0.5, 7.5], [-0.5, 0.5]], &[64, 64], Weight::Zero)?;
    let oracle = minkowski_oracle(minkowski_kernel(1));
    let ctx = CheckContext::new(&oracle, &space);
    let mu0 = DiscreteMeasure::uniform_on_box(&space, &[-0.5, -0.5], &[0.5, 0.5], 3)?;
    let x1 = Event::new(&[4.0, 0.0]);

    let good = tmcp_good_geodesic(&mu0, &x1, 0.5, 0.0, 2.0, 2, 0.02, &ctx)?;
    for e in &good.report.entries {
        println!("{:<8} t={:<5} lhs={:.6} rhs={:.6}", e.label, e.t.unwrap_or(0.0), e.lhs.to_f64(), e.rhs.to_f64());
    }
    let spec = ConditionSpec::new(Variant::TmcpReduced, 0.0, 2.0, 0.5)?.with_nprime_grid(&[2.0, 3.0])?;
    let report = check_tmcp(&mu0, &x1, &spec, &ctx)?;
    println!("TMCP reduced: pass={} worst margin={}", report.pass, report.worst_margin);
    Ok(())
}
