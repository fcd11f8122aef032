//! Bishop–Gromov volume and area ratios in a flat causal diamond.

use lorot::curvature::{bishop_gromov, BishopGromovInput, CheckContext};
use lorot::geodesics::minkowski_oracle;
use lorot::spacetime::{build_grid_space, causal_diamond, minkowski_kernel, Event, Weight};

fn main() -> lorot::Result<()> {
    let h = 1.0 / 128.0;
    let space = build_grid_space(&[[-0.5 * h, 4.0 - 0.5 * h], [-2.0, 2.0]], &[512, 512], Weight::Zero)?;
    let kernel = minkowski_kernel(1);
    let oracle = minkowski_oracle(kernel);
    let ctx = CheckContext::new(&oracle, &space);
    let x = Event::new(&[0.0, 0.0]);
    let set = causal_diamond(&space, &kernel, &x, &Event::new(&[4.0, 0.0]));
    let input = BishopGromovInput { x, set: &set, r: 1.0, big_r: 2.0, k: 0.0, n: 2.0, delta: 0.02, eps: 0.02 };
    let r = bishop_gromov(&input, &ctx)?;
    let closed = |r: f64| 0.5 * r * r * (1.0 + 2.0 * (4.0 / r).ln());
    println!("v_r = {:.5} (closed form {:.5})", r.quantities["v_r"], closed(1.0));
    println!("v_R = {:.5} (closed form {:.5})", r.quantities["v_R"], closed(2.0));
    println!("volume ratio {:.4}, shell ratio {:.4}", r.quantities["volume_ratio"], r.quantities["shell_ratio"]);
    for e in &r.entries {
        println!("{:<10} model {:.4} <= measured {:.4}", e.label, e.lhs.to_f64(), e.rhs.to_f64());
    }
    Ok(())
}
