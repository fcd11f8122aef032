//! Time separation, causal relations, τ-balls and diamonds on a grid.

use lorot::spacetime::{
    build_grid_space, causal_diamond, check_reverse_triangle, minkowski_kernel, tau_ball, CausalKernel, Event, Weight,
};

fn main() -> lorot::Result<()> {
    let kernel = minkowski_kernel(1);
    let o = Event::new(&[0.0, 0.0]);
    for y in [[5.0, 3.0], [1.0, 1.0], [0.0, 1.0]] {
        let y = Event::new(&y);
        println!("tau(o, {:?}) = {} ({:?})", y.coords, kernel.tau(&o, &y), kernel.relation(&o, &y));
    }

    let space = build_grid_space(&[[0.0, 4.0], [-2.0, 2.0]], &[64, 64], Weight::Zero)?;
    let ball = tau_ball(&space, &kernel, &o, 1.0)?;
    let diamond = causal_diamond(&space, &kernel, &o, &Event::new(&[4.0, 0.0]));
    println!("tau-ball of radius 1: {} cells, measure {:.4}", ball.len(), space.mass_of(&ball));
    println!("causal diamond to (4,0): {} cells, measure {:.4}", diamond.len(), space.mass_of(&diamond));

    let chain = (o.clone(), Event::new(&[1.0, 0.5]), Event::new(&[3.0, 0.0]));
    let report = check_reverse_triangle(&kernel, &[chain])?;
    println!("reverse triangle margin {}", report.worst_margin);
    Ok(())
}
