//! Brunn–Minkowski, Bonnet–Myers and Bishop–Gromov estimators.

use super::{coefficient, CheckContext};
use crate::coeffs::{area_profile, vol_profile};
use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::report::{CheckReport, ReportEntry};
use crate::spacetime::{tau_ball_with, CausalKernel, Event, SampledSpace};
use rayon::prelude::*;
use std::f64::consts::PI;

/// `𝔪[A_t]^{1/N'} ≥ c^{(1−t)}(Θ) 𝔪[A_0]^{1/N'} + c^{(t)}(Θ) 𝔪[A_1]^{1/N'}` with
/// `c = τ_{K,N'}` (entries `"tau"`) and `c = σ_{K,N'}` (entries `"sigma"`).
///
/// `A_t` is the set of cells hit by `t`-points of the oracle geodesics over
/// all pairs of cell centers in `A0 × A1`.
pub fn brunn_minkowski(
    a0: &[usize],
    a1: &[usize],
    t: f64,
    k: f64,
    nprime_grid: &[f64],
    eps: f64,
    ctx: &CheckContext,
) -> Result<CheckReport> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("t must lie in [0,1], got {t}")));
    }
    if nprime_grid.is_empty() || nprime_grid.iter().any(|&n| !(n >= 1.0)) {
        return Err(invalid("N' grid must be non-empty with N' >= 1"));
    }
    let space = ctx.space;
    let (m0, m1) = (space.mass_of(a0), space.mass_of(a1));
    if !(m0 > 0.0 && m1 > 0.0) {
        return Err(invalid("both sets need positive reference measure"));
    }
    let kernel = ctx.kernel();
    let n = space.len();
    let init = || (vec![false; n], f64::INFINITY, 0.0f64);
    let (covered, lo, hi) = a0
        .par_iter()
        .try_fold(init, |(mut cov, mut lo, mut hi), &i| {
            let x = space.point(i);
            for &j in a1 {
                let y = space.point(j);
                if !kernel.is_chronological(x, y) {
                    return Err(Error::NotChronological);
                }
                let tau = kernel.tau(x, y);
                lo = lo.min(tau);
                hi = hi.max(tau);
                if let Some(c) = space.locate(&ctx.oracle.point_at(x, y, t)?) {
                    cov[c] = true;
                }
            }
            Ok((cov, lo, hi))
        })
        .try_reduce(init, |(mut a, lo_a, hi_a), (b, lo_b, hi_b)| {
            a.iter_mut().zip(&b).for_each(|(p, q)| *p |= *q);
            Ok((a, lo_a.min(lo_b), hi_a.max(hi_b)))
        })?;
    let cells: Vec<usize> = (0..n).filter(|&c| covered[c]).collect();
    let mt = space.mass_of(&cells);
    let theta = if k < 0.0 { hi } else { lo };

    let spec = serde_json::json!({ "t": t, "K": k, "Nprime_grid": nprime_grid });
    let mut report = CheckReport::new("brunn_minkowski", spec, eps).with_discretization(space.cell_diameter());
    report.quantity("measure_0", m0);
    report.quantity("measure_1", m1);
    report.quantity("measure_t", mt);
    report.quantity("theta", theta);
    for &np in nprime_grid {
        let lhs_root = ExtReal::Finite(mt.powf(1.0 / np));
        for (full, label) in [(true, "tau"), (false, "sigma")] {
            let a = coefficient(full, k, np, 1.0 - t, theta);
            let b = coefficient(full, k, np, t, theta);
            if !a.is_finite() || !b.is_finite() {
                report.note("coefficient blowup: Theta exceeds the diameter bound");
            }
            let bound = a * m0.powf(1.0 / np) + b * m1.powf(1.0 / np);
            report.push(ReportEntry::new(Some(t), Some(np), bound, lhs_root).labeled(label));
        }
    }
    Ok(report.finalize())
}

/// `(π√((N−1)/K), π√(N/K))`: the diameter bounds of the full and reduced
/// conditions.
pub fn bonnet_myers_bound(k: f64, n: f64) -> Result<(f64, f64)> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("Bonnet-Myers needs K > 0, got {k}")));
    }
    if !(n >= 1.0) {
        return Err(invalid(format!("N must be >= 1, got {n}")));
    }
    Ok((PI * ((n - 1.0) / k).sqrt(), PI * (n / k).sqrt()))
}

/// `max τ` over all pairs of sampled points.
pub fn scan_sup_tau(space: &SampledSpace, kernel: &dyn CausalKernel) -> f64 {
    let pts = space.points();
    pts.par_iter()
        .map(|x| pts.iter().map(|y| kernel.tau(x, y)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

/// Compares the sampled `sup τ` with both Bonnet–Myers bounds.
pub fn check_bonnet_myers(space: &SampledSpace, kernel: &dyn CausalKernel, k: f64, n: f64) -> Result<CheckReport> {
    let (full, reduced) = bonnet_myers_bound(k, n)?;
    let sup = scan_sup_tau(space, kernel);
    let h = space.cell_diameter();
    let spec = serde_json::json!({ "K": k, "N": n });
    let mut report = CheckReport::new("bonnet_myers", spec, h).with_discretization(h);
    report.quantity("sup_tau", sup);
    report.quantity("bound_full", full);
    report.quantity("bound_reduced", reduced);
    report.push(ReportEntry::new(None, Some(n), ExtReal::Finite(sup), ExtReal::Finite(full)).labeled("full"));
    report.push(ReportEntry::new(None, Some(n), ExtReal::Finite(sup), ExtReal::Finite(reduced)).labeled("reduced"));
    let report = report.finalize();
    Ok(report)
}

/// Parameters of a Bishop–Gromov comparison.
#[derive(Clone, Debug)]
pub struct BishopGromovInput<'a> {
    pub x: Event,
    /// Cells of the τ-star-shaped set `E`.
    pub set: &'a [usize],
    pub r: f64,
    pub big_r: f64,
    pub k: f64,
    pub n: f64,
    /// Shell width for the area estimate.
    pub delta: f64,
    pub eps: f64,
}

const STAR_SAMPLES: [f64; 7] = [0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875];

fn check_star_shaped(input: &BishopGromovInput, member: &[bool], ctx: &CheckContext) -> Result<()> {
    let space = ctx.space;
    let kernel = ctx.kernel();
    let bad = input.set.par_iter().find_map_any(|&j| {
        let y = space.point(j);
        if !kernel.is_chronological(&input.x, y) {
            return None;
        }
        for s in STAR_SAMPLES {
            let z = ctx.oracle.point_at(&input.x, y, s).ok()?;
            let ok = space
                .locate(&z)
                .is_some_and(|c| member[c] || space.neighbors(c).iter().any(|&m| member[m]));
            if !ok {
                return Some((j, s));
            }
        }
        None
    });
    match bad {
        Some((j, s)) => Err(Error::NotStarShaped(format!(
            "geodesic from the center to cell {j} leaves the set at s = {s}"
        ))),
        None => Ok(()),
    }
}

/// Volume and shell-area ratio comparisons for `E` around `x`.
///
/// `v_r = 𝔪[B̄^τ(x,r) ∩ E]` and `s_r = 𝔪[(B̄^τ(x,r+δ) ∖ B^τ(x,r)) ∩ E]/δ`.
/// Entries: `s_full`, `v_full`, `s_reduced`, `v_reduced`, each
/// `model ratio ≤ measured ratio`.
pub fn bishop_gromov(input: &BishopGromovInput, ctx: &CheckContext) -> Result<CheckReport> {
    let BishopGromovInput { r, big_r, k, n, delta, .. } = *input;
    if !(r > 0.0 && r < big_r) {
        return Err(invalid(format!("radii must satisfy 0 < r < R, got r={r}, R={big_r}")));
    }
    if !(delta > 0.0) {
        return Err(invalid(format!("shell width must be positive, got {delta}")));
    }
    if !(n >= 1.0) {
        return Err(invalid(format!("N must be >= 1, got {n}")));
    }
    if input.set.is_empty() {
        return Err(invalid("the set E is empty"));
    }
    let space = ctx.space;
    let kernel = ctx.kernel();
    let mut member = vec![false; space.len()];
    for &c in input.set {
        member[c] = true;
    }
    check_star_shaped(input, &member, ctx)?;

    let in_set = |cells: Vec<usize>| -> Vec<usize> { cells.into_iter().filter(|&c| member[c]).collect() };
    let ball = |rad: f64, closed: bool| in_set(tau_ball_with(space, kernel, &input.x, rad, closed));
    let volume = |rad: f64| space.mass_of(&ball(rad, true));
    let shell = |rad: f64| (space.mass_of(&ball(rad + delta, true)) - space.mass_of(&ball(rad, false))) / delta;
    let (v_r, v_big) = (volume(r), volume(big_r));
    let (s_r, s_big) = (shell(r), shell(big_r));
    if !(v_big > 0.0 && s_big > 0.0) {
        return Err(invalid("the outer ball or shell has zero measure inside E"));
    }

    let spec = serde_json::json!({
        "x": input.x, "r": r, "R": big_r, "K": k, "N": n, "delta": delta
    });
    let mut report = CheckReport::new("bishop_gromov", spec, input.eps).with_discretization(space.cell_diameter());
    report.quantity("v_r", v_r);
    report.quantity("v_R", v_big);
    report.quantity("s_r", s_r);
    report.quantity("s_R", s_big);
    report.quantity("volume_ratio", v_r / v_big);
    report.quantity("shell_ratio", s_r / s_big);

    let fin = ExtReal::Finite;
    let area_ratio = |m: f64| {
        if m == 0.0 {
            1.0
        } else {
            area_profile(k, m, r) / area_profile(k, m, big_r)
        }
    };
    let vol_ratio = |m: f64| -> Result<f64> { Ok((vol_profile(k, m, r)? / vol_profile(k, m, big_r)?).powf(m)) };

    report.push(ReportEntry::new(None, Some(n), fin(area_ratio(n - 1.0)), fin(s_r / s_big)).labeled("s_full"));
    if n > 1.0 {
        report.push(ReportEntry::new(None, Some(n), fin(vol_ratio(n)?), fin(v_r / v_big)).labeled("v_full"));
    } else {
        report.note("volume comparison of the full condition needs N > 1");
    }
    report.push(ReportEntry::new(None, Some(n), fin(area_ratio(n)), fin(s_r / s_big)).labeled("s_reduced"));
    report.push(ReportEntry::new(None, Some(n), fin(vol_ratio(n + 1.0)?), fin(v_r / v_big)).labeled("v_reduced"));
    Ok(report.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesics::minkowski_oracle;
    use crate::spacetime::{build_grid_space, causal_diamond, minkowski_kernel, Weight};

    #[test]
    fn bonnet_myers_examples() {
        let (full, red) = bonnet_myers_bound(PI * PI, 2.0).unwrap();
        assert!((full - 1.0).abs() < 1e-15);
        assert!((red - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(bonnet_myers_bound(1.0, 1.0).unwrap().0, 0.0);
        assert!(bonnet_myers_bound(0.0, 2.0).is_err());
        assert!(bonnet_myers_bound(-1.0, 2.0).is_err());
    }

    #[test]
    fn flat_window_violates_positive_curvature() {
        let space = build_grid_space(&[[0.0, 8.0], [-1.0, 1.0]], &[16, 4], Weight::Zero).unwrap();
        let k = minkowski_kernel(1);
        let sup = scan_sup_tau(&space, &k);
        assert!(sup > 7.0 && sup < 8.0);
        let r = check_bonnet_myers(&space, &k, 1.0, 2.0).unwrap();
        assert!(!r.pass);
        let ok = check_bonnet_myers(&space, &k, 0.01, 2.0).unwrap();
        assert!(ok.pass);
    }

    #[test]
    fn congruent_squares_equality() {
        let space = build_grid_space(&[[0.0, 6.0], [-1.0, 1.0]], &[48, 16], Weight::Zero).unwrap();
        let oracle = minkowski_oracle(minkowski_kernel(1));
        let ctx = CheckContext::new(&oracle, &space);
        let a0 = space.cells_in_box(&[0.0, -0.5], &[1.0, 0.5]);
        let a1 = space.cells_in_box(&[4.0, -0.5], &[5.0, 0.5]);
        let r = brunn_minkowski(&a0, &a1, 0.5, 0.0, &[2.0, 4.0], 1e-9, &ctx).unwrap();
        assert!((r.quantities["measure_t"] - 1.0).abs() < 1e-12);
        assert!(r.pass, "{:?}", r.entries);
        let lo = space.cells_in_box(&[0.0, -1.0], &[0.5, -0.5]);
        let hi = space.cells_in_box(&[0.0, 0.5], &[0.5, 1.0]);
        assert!(matches!(
            brunn_minkowski(&lo, &hi, 0.5, 0.0, &[2.0], 1e-9, &ctx),
            Err(Error::NotChronological)
        ));
    }

    #[test]
    fn diamond_volume_ratio() {
        let h = 1.0 / 32.0;
        let space = build_grid_space(&[[-h / 2.0, 4.0 - h / 2.0], [-2.0, 2.0]], &[128, 128], Weight::Zero).unwrap();
        let kernel = minkowski_kernel(1);
        let oracle = minkowski_oracle(kernel);
        let ctx = CheckContext::new(&oracle, &space);
        let x = Event::new(&[0.0, 0.0]);
        let e = causal_diamond(&space, &kernel, &x, &Event::new(&[4.0, 0.0]));
        let input = BishopGromovInput { x, set: &e, r: 1.0, big_r: 2.0, k: 0.0, n: 2.0, delta: 0.05, eps: 0.02 };
        let rep = bishop_gromov(&input, &ctx).unwrap();
        let closed = |r: f64| 0.5 * r * r * (1.0 + 2.0 * (4.0 / r).ln());
        assert!((rep.quantities["v_r"] / closed(1.0) - 1.0).abs() < 0.02);
        assert!(rep.pass, "{:?}", rep.entries);
        let bad = BishopGromovInput { r: 2.0, big_r: 1.0, ..input.clone() };
        assert!(bishop_gromov(&bad, &ctx).is_err());
    }

    #[test]
    fn non_star_shaped_set_is_rejected() {
        let space = build_grid_space(&[[0.0, 4.0], [-2.0, 2.0]], &[32, 32], Weight::Zero).unwrap();
        let kernel = minkowski_kernel(1);
        let oracle = minkowski_oracle(kernel);
        let ctx = CheckContext::new(&oracle, &space);
        // two blobs separated by a gap in time
        let mut e = space.cells_in_box(&[0.0, -0.2], &[0.5, 0.2]);
        e.extend(space.cells_in_box(&[3.0, -0.2], &[3.5, 0.2]));
        let input = BishopGromovInput {
            x: Event::new(&[0.0625, 0.0625]),
            set: &e,
            r: 0.5,
            big_r: 1.0,
            k: 0.0,
            n: 2.0,
            delta: 0.1,
            eps: 0.0,
        };
        assert!(matches!(bishop_gromov(&input, &ctx), Err(Error::NotStarShaped(_))));
    }
}
