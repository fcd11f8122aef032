//! Weighted Ricci curvature, Jacobians along transport and the distortion
//! concavity they imply.

use lorot::smoothlab::{
    bakry_emery_ricci, jacobian_along_transport, sigma_equality_profile, verify_distortion_concavity,
    QuadraticField, TransportField, WeightedFlatModel,
};
use nalgebra::{DMatrix, DVector};

fn main() -> lorot::Result<()> {
    let model = WeightedFlatModel::new(2, 4.0, Box::new(QuadraticField::lorentzian(0.5, 2)))?;
    let x = [0.3, 0.1];
    println!("Ric^(N,V)(e0, e0) = {:.6}", bakry_emery_ricci(&model, &x, &[1.0, 0.0])?);

    let grid: Vec<f64> = (0..=16).map(|k| k as f64 / 16.0).collect();
    let flat = WeightedFlatModel::flat(2, 2.0)?;
    let dilation = TransportField::linear(DMatrix::from_row_slice(2, 2, &[0.8, 0.2, 0.2, 0.5]), DVector::zeros(2))?;
    let recs = jacobian_along_transport(&flat, &dilation, &x, &grid)?;
    let samples: Vec<(f64, f64)> = recs.iter().map(|r| (r.t, r.j)).collect();
    let report = verify_distortion_concavity(&samples, 1.0, 0.0, 2.0, 1e-10)?;
    println!("dilation: concavity pass={} worst sigma margin {}", report.pass, report.worst_for("sigma"));

    let profile = sigma_equality_profile(-1.0, 3.0, 1.0, 1.0, 2.0, &grid)?;
    let samples: Vec<(f64, f64)> = grid.iter().copied().zip(profile).collect();
    let report = verify_distortion_concavity(&samples, 1.0, -1.0, 3.0, 1e-8)?;
    println!("equality profile: worst sigma margin {:.2e}", report.worst_for("sigma").to_f64());
    Ok(())
}
