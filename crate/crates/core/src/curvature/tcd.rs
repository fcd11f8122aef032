//! TCD, TCD*, TCD^e, TMCP and pathwise checks on a solver-produced plan.

use super::{coefficient, CheckContext, ConditionSpec};
use crate::coeffs::sigma_kn;
use crate::entropy::{renyi_entropy, u_n};
use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::geodesics::{
    build_plan, density_estimate, density_of, interpolate, DensityField, GeodesicOracle, GeodesicPlan, PlanPair,
};
use crate::report::{CheckReport, ReportEntry};
use crate::spacetime::{CausalKernel, Event, SampledSpace};
use crate::transport::{is_strongly_dualizable_sufficient, is_timelike_dualizable, solve_lp_optimal, DiscreteMeasure};
use rayon::prelude::*;

const BLOWUP: &str = "coefficient blowup: a distortion coefficient is +inf for some pair";

/// Per-pair data reused across `(t, N')`.
struct PairData {
    mass: f64,
    tau: f64,
    rho0: f64,
    rho1: f64,
}

fn pair_data(
    plan: &GeodesicPlan,
    rho0: &DensityField,
    rho1: Option<&DensityField>,
    kernel: &dyn CausalKernel,
    space: &SampledSpace,
) -> Vec<PairData> {
    plan.pairs
        .iter()
        .map(|p| PairData {
            mass: p.mass,
            tau: kernel.tau(&p.source, &p.target),
            rho0: rho0.at(space, &p.source),
            rho1: rho1.map_or(0.0, |r| r.at(space, &p.target)),
        })
        .collect()
}

/// `Σ m [c^{(1−t)} ρ0^{−1/N'} + c^{(t)} ρ1^{−1/N'}]`, or `None` on a blowup.
/// With `target = false` only the source term is kept.
fn distortion_sum(pairs: &[PairData], full: bool, k: f64, nprime: f64, t: f64, target: bool) -> Option<f64> {
    let mut total = 0.0;
    for d in pairs {
        let a = coefficient(full, k, nprime, 1.0 - t, d.tau).finite()?;
        let mut term = a * d.rho0.powf(-1.0 / nprime);
        if target {
            let b = coefficient(full, k, nprime, t, d.tau).finite()?;
            term += b * d.rho1.powf(-1.0 / nprime);
        }
        total += d.mass * term;
    }
    Some(total)
}

fn tau_l2(pairs: &[PairData]) -> f64 {
    pairs.iter().map(|d| d.mass * d.tau * d.tau).sum::<f64>().sqrt()
}

fn interpolant_fields(plan: &GeodesicPlan, times: &[f64], space: &SampledSpace) -> Result<Vec<DensityField>> {
    times
        .par_iter()
        .map(|&t| Ok(density_of(&interpolate(plan, t)?, space)))
        .collect()
}

fn new_report(name: &str, spec: &ConditionSpec, space: &SampledSpace) -> CheckReport {
    let h = space.cell_diameter();
    let value = serde_json::to_value(spec).unwrap_or(serde_json::Value::Null);
    CheckReport::new(name, value, spec.tolerance(h)).with_discretization(h)
}

/// Solves for the ℓ_p-optimal plan from `mu0` to `mu1` and checks the
/// variant in `spec` along it.
pub fn check_tcd(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    spec: &ConditionSpec,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    spec.validate()?;
    if spec.variant.is_tmcp() {
        return Err(invalid("TMCP variants are checked against a Dirac target with check_tmcp"));
    }
    if !mu0.is_ac || !mu1.is_ac {
        return Err(invalid("check_tcd needs absolutely continuous endpoints"));
    }
    let result = solve_lp_optimal(mu0, mu1, spec.p, ctx.kernel())?;
    if !is_timelike_dualizable(&result) {
        return Err(Error::NotDualizable(if result.feasible {
            "optimal coupling charges non-chronological pairs".into()
        } else {
            "no causal coupling exists".into()
        }));
    }
    let plan = build_plan(mu0, mu1, &result, ctx.oracle, &ctx.grid)?;
    let mut report = check_tcd_plan(&plan, spec, ctx.kernel(), ctx.space)?;
    if let ExtReal::Finite(v) = result.objective {
        report.quantity("lp_objective", v);
    }
    Ok(report)
}

/// Checks the variant in `spec` along an existing plan.
pub fn check_tcd_plan(
    plan: &GeodesicPlan,
    spec: &ConditionSpec,
    kernel: &dyn CausalKernel,
    space: &SampledSpace,
) -> Result<CheckReport> {
    spec.validate()?;
    let rho0 = density_estimate(&interpolate(plan, 0.0)?, space)?;
    let rho1 = density_estimate(&interpolate(plan, 1.0)?, space)?;
    if spec.variant.is_pathwise() {
        return check_pathwise(plan, &rho0, &rho1, spec, kernel, space);
    }
    let pairs = pair_data(plan, &rho0, Some(&rho1), kernel, space);
    let fields = interpolant_fields(plan, &spec.t_grid, space)?;
    let mut report = new_report("tcd", spec, space);

    if spec.variant.is_entropic() {
        let theta = tau_l2(&pairs);
        let (u0, u1) = (u_n(&rho0, space, spec.n)?, u_n(&rho1, space, spec.n)?);
        report.quantity("tau_l2", theta);
        for (&t, field) in spec.t_grid.iter().zip(&fields) {
            let a = sigma_kn(spec.k, spec.n, 1.0 - t, theta);
            let b = sigma_kn(spec.k, spec.n, t, theta);
            if !a.is_finite() || !b.is_finite() {
                report.note(BLOWUP);
            }
            let bound = a * u0 + b * u1;
            let ut = ExtReal::Finite(u_n(field, space, spec.n)?);
            report.push(ReportEntry::new(Some(t), Some(spec.n), bound, ut));
        }
        return Ok(report.finalize());
    }

    let full = spec.variant.uses_tau();
    for (&t, field) in spec.t_grid.iter().zip(&fields) {
        for &np in &spec.nprime_grid {
            let lhs = renyi_entropy(field, space, np)?;
            let rhs = match distortion_sum(&pairs, full, spec.k, np, t, true) {
                Some(v) => ExtReal::Finite(-v),
                None => {
                    report.note(BLOWUP);
                    ExtReal::NegInf
                }
            };
            report.push(ReportEntry::new(Some(t), Some(np), ExtReal::Finite(lhs), rhs));
        }
    }
    Ok(report.finalize())
}

/// The pointwise inequality along every plan curve. For each `(t, N')` two
/// entries are recorded: `"integrated"` (the mass-integrated inequality)
/// and `"violation"` (mass-weighted positive part of the pointwise defect).
pub fn check_pathwise(
    plan: &GeodesicPlan,
    rho0: &DensityField,
    rho1: &DensityField,
    spec: &ConditionSpec,
    kernel: &dyn CausalKernel,
    space: &SampledSpace,
) -> Result<CheckReport> {
    spec.validate()?;
    let pairs = pair_data(plan, rho0, Some(rho1), kernel, space);
    if pairs.iter().any(|d| d.mass > 0.0 && (d.rho0 <= 0.0 || d.rho1 <= 0.0)) {
        return Err(Error::ZeroDensity);
    }
    let fields = interpolant_fields(plan, &spec.t_grid, space)?;
    let full = spec.variant.uses_tau();
    let mut report = new_report("pathwise", spec, space);
    let mut outside = 0.0f64;

    for (&t, field) in spec.t_grid.iter().zip(&fields) {
        let rho_t: Vec<f64> = plan.pairs.iter().map(|p| field.at(space, &p.curve.point_at(t))).collect();
        for &np in &spec.nprime_grid {
            let e = -1.0 / np;
            let (mut lhs, mut rhs, mut viol) = (0.0, 0.0, 0.0);
            let mut blowup = false;
            let mut skipped = 0.0;
            for (d, &rt) in pairs.iter().zip(&rho_t) {
                if rt <= 0.0 {
                    skipped += d.mass;
                    continue;
                }
                let a = coefficient(full, spec.k, np, 1.0 - t, d.tau);
                let b = coefficient(full, spec.k, np, t, d.tau);
                let (Some(a), Some(b)) = (a.finite(), b.finite()) else {
                    blowup = true;
                    continue;
                };
                let bound = a * d.rho0.powf(e) + b * d.rho1.powf(e);
                let here = rt.powf(e);
                lhs += d.mass * here;
                rhs += d.mass * bound;
                viol += d.mass * (bound - here).max(0.0);
            }
            outside = outside.max(skipped);
            let (rhs, viol) = if blowup {
                report.note(BLOWUP);
                (ExtReal::NegInf, ExtReal::PosInf)
            } else {
                (ExtReal::Finite(-rhs), ExtReal::Finite(viol))
            };
            report.push(ReportEntry::new(Some(t), Some(np), ExtReal::Finite(-lhs), rhs).labeled("integrated"));
            report.push(ReportEntry::new(Some(t), Some(np), viol, ExtReal::ZERO).labeled("violation"));
        }
    }
    if outside > 0.0 {
        report.note(format!("mass {outside:e} of an interpolant left the window and was skipped"));
        report.quantity("skipped_mass", outside);
    }
    Ok(report.finalize())
}

/// The plan from `mu0` to `δ_{x1}`; the product coupling is the only one.
pub(crate) fn dirac_plan(
    mu0: &DiscreteMeasure,
    x1: &Event,
    p: f64,
    oracle: &dyn GeodesicOracle,
    grid: &[f64],
) -> Result<GeodesicPlan> {
    let kernel = oracle.kernel();
    let support = mu0.atoms.iter().zip(&mu0.weights).filter(|(_, &w)| w > 0.0);
    if support.clone().any(|(x, _)| !kernel.is_chronological(x, x1)) {
        return Err(Error::NotChronological);
    }
    let pairs = mu0
        .atoms
        .par_iter()
        .zip(&mu0.weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(x, &w)| {
            let curve = oracle.connect(x, x1, grid)?;
            Ok(PlanPair { source: x.clone(), target: x1.clone(), mass: w, curve })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GeodesicPlan { pairs, p, source_ac: mu0.is_ac, target_ac: false })
}

/// TMCP-type checks from `mu0` toward `δ_{x1}` at `t ∈ t_grid ∖ {1}`.
pub fn check_tmcp(mu0: &DiscreteMeasure, x1: &Event, spec: &ConditionSpec, ctx: &CheckContext) -> Result<CheckReport> {
    spec.validate()?;
    if !spec.variant.is_tmcp() {
        return Err(invalid("check_tmcp needs a TMCP variant"));
    }
    if !mu0.is_ac {
        return Err(invalid("check_tmcp needs an absolutely continuous source"));
    }
    let plan = dirac_plan(mu0, x1, spec.p, ctx.oracle, &ctx.grid)?;
    let space = ctx.space;
    let rho0 = density_estimate(mu0, space)?;
    let pairs = pair_data(&plan, &rho0, None, ctx.kernel(), space);
    let times: Vec<f64> = spec.t_grid.iter().copied().filter(|&t| t < 1.0).collect();
    let fields = interpolant_fields(&plan, &times, space)?;
    let mut report = new_report("tmcp", spec, space);

    if spec.variant.is_entropic() {
        let theta = tau_l2(&pairs);
        let u0 = u_n(&rho0, space, spec.n)?;
        report.quantity("tau_l2", theta);
        for (&t, field) in times.iter().zip(&fields) {
            let a = sigma_kn(spec.k, spec.n, 1.0 - t, theta);
            if !a.is_finite() {
                report.note(BLOWUP);
            }
            let ut = ExtReal::Finite(u_n(field, space, spec.n)?);
            report.push(ReportEntry::new(Some(t), Some(spec.n), a * u0, ut));
        }
        return Ok(report.finalize());
    }

    let full = spec.variant.uses_tau();
    for (&t, field) in times.iter().zip(&fields) {
        for &np in &spec.nprime_grid {
            let lhs = renyi_entropy(field, space, np)?;
            let rhs = match distortion_sum(&pairs, full, spec.k, np, t, false) {
                Some(v) => ExtReal::Finite(-v),
                None => {
                    report.note(BLOWUP);
                    ExtReal::NegInf
                }
            };
            report.push(ReportEntry::new(Some(t), Some(np), ExtReal::Finite(lhs), rhs));
        }
    }
    Ok(report.finalize())
}

/// `inf` and `sup` of τ over the supports of two measures.
pub(crate) fn tau_range(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure, kernel: &dyn CausalKernel) -> (f64, f64) {
    mu0.atoms
        .par_iter()
        .zip(&mu0.weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(x, _)| {
            mu1.atoms
                .iter()
                .zip(&mu1.weights)
                .filter(|(_, &w)| w > 0.0)
                .map(|(y, _)| kernel.tau(x, y))
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)))
        })
        .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)))
}

/// The midpoint inequality `S_{N'}(μ_{1/2}) ≤ σ^{(1/2)}(θ)(S_{N'}(μ0) + S_{N'}(μ1))`
/// with θ the sup of τ over the supports when `K < 0` and the inf otherwise.
pub fn midpoint_check(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    p: f64,
    k: f64,
    nprime_grid: &[f64],
    eps: f64,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    if nprime_grid.iter().any(|&n| !(n >= 1.0)) || nprime_grid.is_empty() {
        return Err(invalid("N' grid must be non-empty with N' >= 1"));
    }
    let kernel = ctx.kernel();
    if !is_strongly_dualizable_sufficient(mu0, mu1, kernel) {
        return Err(Error::NotChronological);
    }
    let result = solve_lp_optimal(mu0, mu1, p, kernel)?;
    if !is_timelike_dualizable(&result) {
        return Err(Error::NotDualizable("optimal coupling is not chronological".into()));
    }
    let plan = build_plan(mu0, mu1, &result, ctx.oracle, &ctx.grid)?;
    let space = ctx.space;
    let mid = density_of(&interpolate(&plan, 0.5)?, space);
    let (f0, f1) = (density_of(mu0, space), density_of(mu1, space));
    let (lo, hi) = tau_range(mu0, mu1, kernel);
    let theta = if k < 0.0 { hi } else { lo };

    let h = space.cell_diameter();
    let spec = serde_json::json!({ "K": k, "p": p, "Nprime_grid": nprime_grid });
    let mut report = CheckReport::new("midpoint", spec, eps).with_discretization(h);
    report.quantity("theta", theta);
    for &np in nprime_grid {
        let c = sigma_kn(k, np, 0.5, theta);
        if !c.is_finite() {
            report.note(BLOWUP);
        }
        let s0 = renyi_entropy(&f0, space, np)?;
        let s1 = renyi_entropy(&f1, space, np)?;
        let lhs = renyi_entropy(&mid, space, np)?;
        report.push(ReportEntry::new(Some(0.5), Some(np), ExtReal::Finite(lhs), c * (s0 + s1)));
    }
    Ok(report.finalize())
}
