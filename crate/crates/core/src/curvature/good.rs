//! Good geodesics: dyadic bisection with excess-functional selection, and
//! the density and entropy bounds along contractions toward a Dirac mass.

use super::tcd::{dirac_plan, tau_range};
use super::CheckContext;
use crate::entropy::{excess_functional, renyi_entropy};
use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::geodesics::{build_plan, density_estimate, density_of, dyadic_grid, interpolate, restrict_plan, GeodesicPlan};
use crate::report::{CheckReport, ReportEntry};
use crate::spacetime::{Event, SampledSpace};
use crate::transport::{
    is_strongly_dualizable_sufficient, is_timelike_dualizable, solve_lp_optimal, solve_lp_penalized, DiscreteMeasure,
};

/// Relative weight of the excess penalty against the transport objective.
const PENALTY_SCALE: f64 = 1e-6;
/// Largest accepted loss of ℓ_p-optimality for a re-solved plan.
const OPTIMALITY_LOSS: f64 = 1e-8;
/// Excess below this is treated as zero and triggers no re-solve.
const EXCESS_FLOOR: f64 = 1e-12;

/// A geodesic known at dyadic times, glued from segment plans.
#[derive(Clone, Debug)]
pub struct GoodGeodesic {
    /// Dyadic nodes `k 2^{-depth}`.
    pub times: Vec<f64>,
    /// `μ_t` at each node.
    pub measures: Vec<DiscreteMeasure>,
    /// Plan on `[times[i], times[i+1]]`.
    pub segments: Vec<GeodesicPlan>,
    pub report: CheckReport,
}

fn sup_density(mu: &DiscreteMeasure, space: &SampledSpace) -> f64 {
    density_of(mu, space).sup()
}

/// Re-solves the segment problem with arcs whose midpoint lands in an
/// over-threshold cell slightly penalized. Returns the new plan when it is
/// still optimal and lowers the excess.
fn reselect(
    plan: &GeodesicPlan,
    c: f64,
    excess: f64,
    ctx: &CheckContext,
) -> Result<Option<(GeodesicPlan, f64)>> {
    let space = ctx.space;
    let kernel = ctx.kernel();
    let nu0 = interpolate(plan, 0.0)?;
    let nu1 = interpolate(plan, 1.0)?;
    let mid = density_of(&interpolate(plan, 0.5)?, space);
    let over: Vec<bool> = mid.density.iter().map(|&r| r > c).collect();

    let base = solve_lp_optimal(&nu0, &nu1, plan.p, kernel)?;
    let Some(opt) = base.objective.finite() else {
        return Ok(None);
    };
    // objectives are ‖τ‖_{L^p}; gains and losses live in units of Σ π τ^p
    let gain = opt.powf(plan.p).max(f64::MIN_POSITIVE);
    let lambda = PENALTY_SCALE * gain;
    let penalty = |i: usize, j: usize| -> f64 {
        let hit = ctx
            .oracle
            .point_at(&nu0.atoms[i], &nu1.atoms[j], 0.5)
            .ok()
            .and_then(|z| space.locate(&z))
            .is_some_and(|cell| over[cell]);
        if hit {
            lambda
        } else {
            0.0
        }
    };
    let result = solve_lp_penalized(&nu0, &nu1, plan.p, kernel, Some(&penalty))?;
    if !is_timelike_dualizable(&result) {
        return Ok(None);
    }
    let Some(value) = result.objective.finite() else {
        return Ok(None);
    };
    if (gain - value.powf(plan.p)) / gain > OPTIMALITY_LOSS {
        return Ok(None);
    }
    let candidate = build_plan(&nu0, &nu1, &result, ctx.oracle, &ctx.grid)?;
    let new_excess = excess_functional(&density_of(&interpolate(&candidate, 0.5)?, space), space, c)?;
    Ok((new_excess < excess).then_some((candidate, new_excess)))
}

/// Dyadic bisection of the ℓ_p-optimal plan from `mu0` to `mu1`. At every
/// level each segment's midpoint is selected among optimal plans by
/// lowering the excess functional, and the final interpolants are checked
/// against `‖ρ_t‖ ≤ e^{D√(K⁻N)/2} max(‖ρ0‖, ‖ρ1‖)`.
///
/// Entries `"thresh"` record `‖ρ_t‖ / c ≤ 1` and entries `"excess"` record
/// `F_c(μ_t) ≤ 0` at each dyadic node.
#[allow(clippy::too_many_arguments)]
pub fn good_geodesic_bisect(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    p: f64,
    k: f64,
    n: f64,
    depth: u32,
    eps: f64,
    ctx: &CheckContext,
) -> Result<GoodGeodesic> {
    if depth < 1 {
        return Err(invalid("bisection depth must be at least 1"));
    }
    if !(n >= 1.0) {
        return Err(invalid(format!("N must be >= 1, got {n}")));
    }
    let space = ctx.space;
    let kernel = ctx.kernel();
    if !is_strongly_dualizable_sufficient(mu0, mu1, kernel) {
        return Err(Error::NotDualizable("supports are not chronologically related".into()));
    }
    let m = density_estimate(mu0, space)?.sup().max(density_estimate(mu1, space)?.sup());
    let (_, d) = tau_range(mu0, mu1, kernel);
    let rate = d * ((-k).max(0.0) * n).sqrt();

    let result = solve_lp_optimal(mu0, mu1, p, kernel)?;
    if !is_timelike_dualizable(&result) {
        return Err(Error::NotDualizable("optimal coupling is not chronological".into()));
    }
    let mut segments = vec![build_plan(mu0, mu1, &result, ctx.oracle, &ctx.grid)?];
    let mut resolves = 0usize;
    let mut accepted = 0usize;
    let mut exponent = 0.0;
    for level in 0..depth {
        exponent += (-(level as f64) - 2.0).exp2();
        let c = (exponent * rate).exp() * m;
        let mut next = Vec::with_capacity(2 * segments.len());
        for seg in &segments {
            let mid = density_of(&interpolate(seg, 0.5)?, space);
            let excess = excess_functional(&mid, space, c)?;
            let mut chosen = seg.clone();
            if excess > EXCESS_FLOOR {
                resolves += 1;
                if let Some((plan, _)) = reselect(seg, c, excess, ctx)? {
                    accepted += 1;
                    chosen = plan;
                }
            }
            next.push(restrict_plan(&chosen, 0.0, 0.5)?);
            next.push(restrict_plan(&chosen, 0.5, 1.0)?);
        }
        segments = next;
    }

    let times = dyadic_grid(depth);
    let mut measures = Vec::with_capacity(times.len());
    for seg in &segments {
        measures.push(interpolate(seg, 0.0)?);
    }
    measures.push(interpolate(segments.last().expect("depth >= 1"), 1.0)?);

    let c = (0.5 * rate).exp() * m;
    let spec = serde_json::json!({ "p": p, "K": k, "N": n, "depth": depth });
    let mut report = CheckReport::new("good_geodesic", spec, eps).with_discretization(space.cell_diameter());
    report.quantity("D", d);
    report.quantity("threshold", c);
    report.quantity("max_endpoint_density", m);
    report.quantity("resolves", resolves as f64);
    report.quantity("accepted_resolves", accepted as f64);
    let mut worst = 0.0f64;
    for (&t, mu) in times.iter().zip(&measures) {
        let field = density_of(mu, space);
        let sup = field.sup();
        worst = worst.max(sup / c);
        let fc = excess_functional(&field, space, c)?;
        report.push(ReportEntry::new(Some(t), Some(n), ExtReal::Finite(sup / c), ExtReal::Finite(1.0)).labeled("thresh"));
        report.push(ReportEntry::new(Some(t), Some(n), ExtReal::Finite(fc), ExtReal::ZERO).labeled("excess"));
    }
    report.quantity("max_density_ratio", worst);
    Ok(GoodGeodesic { times, measures, segments, report: report.finalize() })
}

/// Contraction from `mu0` toward `δ_{x1}`, checking at the dyadic nodes
/// `t < 1` the density bound `‖ρ_t‖ ≤ (1−t)^{−N} e^{Dt√(K⁻N)} ‖ρ0‖` (entries
/// `"density"`, recorded as a ratio `≤ 1`) and the entropy bound
/// `S_N(μ_t) ≤ (1−t) e^{−Dt√(K⁻/N)} S_N(μ0)` (entries `"entropy"`).
#[allow(clippy::too_many_arguments)]
pub fn tmcp_good_geodesic(
    mu0: &DiscreteMeasure,
    x1: &Event,
    p: f64,
    k: f64,
    n: f64,
    depth: u32,
    eps: f64,
    ctx: &CheckContext,
) -> Result<GoodGeodesic> {
    if depth < 1 {
        return Err(invalid("bisection depth must be at least 1"));
    }
    if !(n >= 1.0) {
        return Err(invalid(format!("N must be >= 1, got {n}")));
    }
    if !mu0.is_ac {
        return Err(invalid("the source must be absolutely continuous"));
    }
    let space = ctx.space;
    let kernel = ctx.kernel();
    let plan = dirac_plan(mu0, x1, p, ctx.oracle, &ctx.grid)?;
    let d = plan.pairs.iter().map(|q| kernel.tau(&q.source, x1)).fold(0.0, f64::max);
    let kneg = (-k).max(0.0);
    let rho0 = density_estimate(mu0, space)?;
    let sup0 = rho0.sup();
    let s0 = renyi_entropy(&rho0, space, n)?;

    let times: Vec<f64> = dyadic_grid(depth).into_iter().filter(|&t| t < 1.0).collect();
    let spec = serde_json::json!({ "p": p, "K": k, "N": n, "depth": depth, "x1": x1 });
    let mut report = CheckReport::new("tmcp_good_geodesic", spec, eps).with_discretization(space.cell_diameter());
    report.quantity("D", d);
    let mut measures = Vec::with_capacity(times.len());
    for &t in &times {
        let mu = interpolate(&plan, t)?;
        let field = density_of(&mu, space);
        let bound = (1.0 - t).powf(-n) * (d * t * (kneg * n).sqrt()).exp() * sup0;
        let ratio = sup_density(&mu, space) / bound;
        report.push(ReportEntry::new(Some(t), Some(n), ExtReal::Finite(ratio), ExtReal::Finite(1.0)).labeled("density"));
        let st = renyi_entropy(&field, space, n)?;
        let sbound = (1.0 - t) * (-d * t * (kneg / n).sqrt()).exp() * s0;
        report.push(ReportEntry::new(Some(t), Some(n), ExtReal::Finite(st), ExtReal::Finite(sbound)).labeled("entropy"));
        measures.push(mu);
    }
    Ok(GoodGeodesic { times, measures, segments: vec![plan], report: report.finalize() })
}
