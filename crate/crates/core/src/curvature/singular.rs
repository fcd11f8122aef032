//! Empirical mutual-singularity probe for interpolants of several plans.

use crate::error::{invalid, Result};
use crate::extreal::ExtReal;
use crate::geodesics::{interpolate, GeodesicPlan};
use crate::report::{CheckReport, ReportEntry};
use crate::spacetime::SampledSpace;
use std::collections::HashMap;

fn cell_masses(plan: &GeodesicPlan, t: f64, space: &SampledSpace) -> Result<HashMap<usize, f64>> {
    let mu = interpolate(plan, t)?;
    let mut out = HashMap::new();
    for (a, &w) in mu.atoms.iter().zip(&mu.weights) {
        if let Some(c) = space.locate(a) {
            *out.entry(c).or_insert(0.0) += w;
        }
    }
    Ok(out)
}

/// `Σ_cells Σ_{a<b} min(m_a, m_b)` over all pairs of plans.
fn overlap(masses: &[HashMap<usize, f64>]) -> f64 {
    let mut total = 0.0;
    for (a, ma) in masses.iter().enumerate() {
        for mb in &masses[a + 1..] {
            total += ma
                .iter()
                .filter_map(|(c, &x)| mb.get(c).map(|&y| x.min(y)))
                .sum::<f64>();
        }
    }
    total
}

/// Cell-overlap mass of the interpolants of `plans` at each `t ∈ (0,1)` of
/// `t_grid`. Passes iff every overlap is zero. Overlapping endpoint supports
/// are recorded as a note since the expected property then does not apply.
pub fn mutual_singularity_probe(plans: &[GeodesicPlan], t_grid: &[f64], space: &SampledSpace) -> Result<CheckReport> {
    if t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(invalid("times must lie in [0,1]"));
    }
    let spec = serde_json::json!({ "plans": plans.len(), "t_grid": t_grid });
    let mut report = CheckReport::new("mutual_singularity", spec, 0.0).with_discretization(space.cell_diameter());
    for end in [0.0, 1.0] {
        let masses = plans.iter().map(|p| cell_masses(p, end, space)).collect::<Result<Vec<_>>>()?;
        let o = overlap(&masses);
        if o > 0.0 {
            report.note(format!("endpoint supports at t = {end} share cells (overlap {o:e})"));
        }
    }
    let mut worst = 0.0f64;
    for &t in t_grid.iter().filter(|&&t| t > 0.0 && t < 1.0) {
        let masses = plans.iter().map(|p| cell_masses(p, t, space)).collect::<Result<Vec<_>>>()?;
        let o = overlap(&masses);
        worst = worst.max(o);
        report.push(ReportEntry::new(Some(t), None, ExtReal::Finite(o), ExtReal::ZERO).labeled("overlap"));
    }
    report.quantity("max_overlap", worst);
    Ok(report.finalize())
}
