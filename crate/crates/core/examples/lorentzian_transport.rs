//! ℓ_p transport between discrete measures by network simplex.

use lorot::spacetime::{minkowski_kernel, Event};
use lorot::transport::{is_timelike_dualizable, solve_lp_optimal, DiscreteMeasure};

fn main() -> lorot::Result<()> {
    let kernel = minkowski_kernel(1);
    let mu0 = DiscreteMeasure::normalized(
        vec![Event::new(&[0.0, -0.5]), Event::new(&[0.0, 0.5])],
        vec![1.0, 1.0],
        false,
    )?;
    let mu1 = DiscreteMeasure::normalized(
        vec![Event::new(&[3.0, -1.0]), Event::new(&[3.0, 1.0])],
        vec![1.0, 1.0],
        false,
    )?;
    for p in [0.25, 0.5, 1.0] {
        let r = solve_lp_optimal(&mu0, &mu1, p, &kernel)?;
        println!("p = {p}: l_p = {:.6}, chronological coupling: {}", r.objective.to_f64(), is_timelike_dualizable(&r));
        print!("{}", r.coupling.to_csv());
    }

    // no causal coupling exists: l_p = -inf
    let late = DiscreteMeasure::dirac(Event::new(&[0.5, 4.0]));
    let r = solve_lp_optimal(&mu0, &late, 0.5, &kernel)?;
    println!("spacelike target: l_p = {}", r.objective);
    Ok(())
}
