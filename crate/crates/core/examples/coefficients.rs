//! Distortion coefficients σ and τ across curvature signs.

use lorot::coeffs::{sigma_kn, tau_kn, vol_profile};

fn main() {
    let theta = 1.5;
    println!("{:>6} {:>4} {:>6} {:>12} {:>12}", "K", "N", "t", "sigma", "tau");
    for k in [-4.0, -1.0, 0.0, 1.0, 4.0] {
        for n in [2.0, 3.0] {
            for t in [0.25, 0.5, 0.75] {
                let s = sigma_kn(k, n, t, theta);
                let tau = tau_kn(k, n, t, theta);
                println!("{k:>6} {n:>4} {t:>6} {:>12.6} {:>12.6}", s.to_f64(), tau.to_f64());
            }
        }
    }
    // past the diameter bound the coefficient is +inf
    println!("sigma_(10,1)^(1/2)(1) = {}", sigma_kn(10.0, 1.0, 0.5, 1.0));
    for r in [0.5, 1.0, 2.0] {
        println!("volume profile K=-1, N=3, r={r}: {:.6}", vol_profile(-1.0, 3.0, r).unwrap());
    }
}
