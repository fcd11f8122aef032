//! Rényi and Boltzmann entropies relative to the reference measure, the
//! exponentiated entropy 𝒰_N and the excess functional F_c.

use crate::error::{invalid, Result};
use crate::extreal::ExtReal;
use crate::geodesics::DensityField;
use crate::spacetime::SampledSpace;

/// `S_N(μ) = −Σ ρ_i^{1−1/N} m_i`; singular mass contributes nothing.
pub fn renyi_entropy(field: &DensityField, space: &SampledSpace, n: f64) -> Result<f64> {
    if !(n >= 1.0) {
        return Err(invalid(format!("N must be >= 1, got {n}")));
    }
    let e = 1.0 - 1.0 / n;
    Ok(-field
        .density
        .iter()
        .zip(space.masses())
        .filter(|(r, _)| **r > 0.0)
        .map(|(r, m)| r.powf(e) * m)
        .sum::<f64>())
}

/// `Ent(μ) = Σ ρ log ρ m`, or `+inf` when μ has a singular part.
pub fn boltzmann_entropy(field: &DensityField, space: &SampledSpace) -> ExtReal {
    if field.singular_mass > 0.0 {
        return ExtReal::PosInf;
    }
    let s: f64 = field
        .density
        .iter()
        .zip(space.masses())
        .filter(|(r, _)| **r > 0.0)
        .map(|(r, m)| r * r.ln() * m)
        .sum();
    ExtReal::Finite(s)
}

/// `𝒰_N(μ) = e^{−Ent(μ)/N}`.
pub fn u_n(field: &DensityField, space: &SampledSpace, n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(invalid(format!("N must be positive, got {n}")));
    }
    Ok(match boltzmann_entropy(field, space) {
        ExtReal::Finite(e) => (-e / n).exp(),
        ExtReal::PosInf => 0.0,
        ExtReal::NegInf => f64::INFINITY,
    })
}

/// `F_c(μ) = ‖(ρ − c)⁺‖_{L¹(𝔪)} + μ_⊥[M]`.
pub fn excess_functional(field: &DensityField, space: &SampledSpace, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(invalid(format!("threshold c must be positive, got {c}")));
    }
    let ac: f64 = field
        .density
        .iter()
        .zip(space.masses())
        .map(|(r, m)| (r - c).max(0.0) * m)
        .sum();
    Ok(ac + field.singular_mass)
}

/// `N + N·S_N(μ)`, which increases to `Ent(μ)` as `N → ∞`.
pub fn renyi_entropy_gap(field: &DensityField, space: &SampledSpace, n: f64) -> Result<f64> {
    Ok(n + n * renyi_entropy(field, space, n)?)
}
