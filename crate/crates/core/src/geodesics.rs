//! Timelike geodesics, geodesic plans and displacement interpolation.

use crate::error::{invalid, Error, Result};
use crate::spacetime::{CausalKernel, Event, MinkowskiKernel, SampledSpace};
use crate::transport::{DiscreteMeasure, TransportResult};
use rayon::prelude::*;
use std::fmt::Write as _;

/// Positions closer than this (in every coordinate) are merged.
pub const MERGE_TOL: f64 = 1e-12;

/// A sampled curve `s ↦ γ_s` on an increasing grid of `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub samples: Vec<(f64, Event)>,
}

impl Curve {
    pub fn new(samples: Vec<(f64, Event)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invalid("a curve needs at least two samples"));
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(invalid("curve parameters must be strictly increasing"));
        }
        Ok(Curve { samples })
    }

    pub fn start(&self) -> &Event {
        &self.samples[0].1
    }

    pub fn end(&self) -> &Event {
        &self.samples[self.samples.len() - 1].1
    }

    pub fn grid(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    /// Piecewise-linear evaluation; exact on sample nodes.
    pub fn point_at(&self, s: f64) -> Event {
        let n = self.samples.len();
        if s <= self.samples[0].0 {
            return self.samples[0].1.clone();
        }
        if s >= self.samples[n - 1].0 {
            return self.samples[n - 1].1.clone();
        }
        let k = self.samples.partition_point(|(u, _)| *u <= s) - 1;
        let (s0, a) = &self.samples[k];
        if *s0 == s {
            return a.clone();
        }
        let (s1, b) = &self.samples[k + 1];
        a.lerp(b, (s - s0) / (s1 - s0))
    }

    /// Sum of τ over consecutive samples.
    pub fn tau_length(&self, kernel: &dyn CausalKernel) -> f64 {
        self.samples
            .windows(2)
            .map(|w| kernel.tau(&w[0].1, &w[1].1))
            .sum()
    }
}

/// Produces maximizing curves between chronologically related events.
pub trait GeodesicOracle: Send + Sync {
    fn kernel(&self) -> &dyn CausalKernel;

    fn connect(&self, x: &Event, y: &Event, grid: &[f64]) -> Result<Curve>;

    /// `γ_s` of the connecting geodesic.
    fn point_at(&self, x: &Event, y: &Event, s: f64) -> Result<Event> {
        let grid = if s > 0.0 && s < 1.0 { vec![0.0, s, 1.0] } else { vec![0.0, 1.0] };
        Ok(self.connect(x, y, &grid)?.point_at(s))
    }
}

/// Affine segments in Minkowski space.
#[derive(Clone, Copy, Debug)]
pub struct MinkowskiOracle {
    kernel: MinkowskiKernel,
}

pub fn minkowski_oracle(kernel: MinkowskiKernel) -> MinkowskiOracle {
    MinkowskiOracle { kernel }
}

impl GeodesicOracle for MinkowskiOracle {
    fn kernel(&self) -> &dyn CausalKernel {
        &self.kernel
    }

    fn connect(&self, x: &Event, y: &Event, grid: &[f64]) -> Result<Curve> {
        if !self.kernel.is_chronological(x, y) {
            return Err(Error::NotChronological);
        }
        Curve::new(grid.iter().map(|&s| (s, x.lerp(y, s))).collect())
    }

    fn point_at(&self, x: &Event, y: &Event, s: f64) -> Result<Event> {
        if !self.kernel.is_chronological(x, y) {
            return Err(Error::NotChronological);
        }
        Ok(x.lerp(y, s))
    }
}

/// `2^levels + 1` equispaced nodes of `[0, 1]`.
pub fn dyadic_grid(levels: u32) -> Vec<f64> {
    let n = 1usize << levels;
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

/// The default curve sampling, `2^6 + 1` nodes.
pub fn default_grid() -> Vec<f64> {
    dyadic_grid(6)
}

/// Resamples `curve` on its own grid so that `τ(γ_0, γ_t) = t·τ(γ_0, γ_1)`.
pub fn reparametrize_proper_time(curve: &Curve, kernel: &dyn CausalKernel) -> Result<Curve> {
    let x = curve.start();
    let total = kernel.tau(x, curve.end());
    if !(total > 0.0) {
        return Err(Error::NotChronological);
    }
    let psi: Vec<f64> = curve
        .samples
        .iter()
        .map(|(_, p)| kernel.tau(x, p) / total)
        .collect();
    for k in 1..psi.len() {
        if !(psi[k] > psi[k - 1]) {
            return Err(Error::NonMonotone(k));
        }
    }
    let n = psi.len();
    let samples = curve
        .samples
        .iter()
        .enumerate()
        .map(|(idx, (t, _))| {
            if idx == 0 {
                return (*t, curve.start().clone());
            }
            if idx == n - 1 {
                return (*t, curve.end().clone());
            }
            // monotone piecewise-linear inversion of psi
            let k = psi.partition_point(|&v| v <= *t).clamp(1, n - 1);
            let (p0, p1) = (psi[k - 1], psi[k]);
            let (s0, s1) = (curve.samples[k - 1].0, curve.samples[k].0);
            let s = s0 + (s1 - s0) * (t - p0) / (p1 - p0);
            (*t, curve.point_at(s))
        })
        .collect();
    Curve::new(samples)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanPair {
    pub source: Event,
    pub target: Event,
    pub mass: f64,
    pub curve: Curve,
}

/// A weighted family of proper-time parametrized timelike geodesics.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicPlan {
    pub pairs: Vec<PlanPair>,
    pub p: f64,
    pub source_ac: bool,
    pub target_ac: bool,
}

/// One curve per positive coupling entry.
pub fn build_plan(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    result: &TransportResult,
    oracle: &dyn GeodesicOracle,
    grid: &[f64],
) -> Result<GeodesicPlan> {
    if !result.feasible {
        return Err(Error::NotDualizable("no causal coupling exists".into()));
    }
    let pairs = result
        .coupling
        .entries
        .par_iter()
        .filter(|e| e.2 > 0.0)
        .map(|&(i, j, m)| {
            let (x, y) = (&mu0.atoms[i], &mu1.atoms[j]);
            let curve = oracle.connect(x, y, grid)?;
            Ok(PlanPair { source: x.clone(), target: y.clone(), mass: m, curve })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GeodesicPlan { pairs, p: result.p, source_ac: mu0.is_ac, target_ac: mu1.is_ac })
}

/// Merges atoms that coincide to within [`MERGE_TOL`].
pub fn merge_atoms(atoms: Vec<Event>, weights: Vec<f64>) -> (Vec<Event>, Vec<f64>) {
    let key = |e: &Event| -> Vec<i64> { e.coords.iter().map(|c| (c / MERGE_TOL).round() as i64).collect() };
    let mut order: Vec<(Vec<i64>, usize)> = atoms.iter().enumerate().map(|(i, a)| (key(a), i)).collect();
    order.sort();
    let mut out_a: Vec<Event> = Vec::new();
    let mut out_w: Vec<f64> = Vec::new();
    for (_, i) in order {
        if let Some(last) = out_a.last() {
            if last.max_abs_diff(&atoms[i]) <= MERGE_TOL {
                *out_w.last_mut().unwrap() += weights[i];
                continue;
            }
        }
        out_a.push(atoms[i].clone());
        out_w.push(weights[i]);
    }
    (out_a, out_w)
}

/// `μ_t = (e_t)_# 𝛑`.
pub fn interpolate(plan: &GeodesicPlan, t: f64) -> Result<DiscreteMeasure> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("t must lie in [0,1], got {t}")));
    }
    let atoms: Vec<Event> = plan.pairs.par_iter().map(|p| p.curve.point_at(t)).collect();
    let weights: Vec<f64> = plan.pairs.iter().map(|p| p.mass).collect();
    let (atoms, weights) = merge_atoms(atoms, weights);
    let is_ac = if t == 0.0 {
        plan.source_ac
    } else if t == 1.0 {
        plan.target_ac
    } else {
        plan.source_ac || plan.target_ac
    };
    let total: f64 = weights.iter().sum();
    let weights = weights.into_iter().map(|w| w / total).collect();
    DiscreteMeasure::new(atoms, weights, is_ac)
}

/// Re-indexes every curve by `r ↦ γ_{(1−r)s + rt}` on its own grid.
pub fn restrict_plan(plan: &GeodesicPlan, s: f64, t: f64) -> Result<GeodesicPlan> {
    if !(0.0 <= s && s < t && t <= 1.0) {
        return Err(invalid(format!("restriction needs 0 <= s < t <= 1, got s={s}, t={t}")));
    }
    let pairs = plan
        .pairs
        .par_iter()
        .map(|p| {
            let samples: Vec<(f64, Event)> = p
                .curve
                .samples
                .iter()
                .map(|(r, _)| (*r, p.curve.point_at((1.0 - r) * s + r * t)))
                .collect();
            let curve = Curve { samples };
            PlanPair { source: curve.start().clone(), target: curve.end().clone(), mass: p.mass, curve }
        })
        .collect();
    Ok(GeodesicPlan {
        pairs,
        p: plan.p,
        source_ac: if s == 0.0 { plan.source_ac } else { plan.source_ac || plan.target_ac },
        target_ac: if t == 1.0 { plan.target_ac } else { plan.source_ac || plan.target_ac },
    })
}

/// CSV rows `pair,s,mass,x0,x1,...` for plotting.
pub fn plan_to_csv(plan: &GeodesicPlan) -> String {
    let dim = plan.pairs.first().map_or(0, |p| p.source.coords.len());
    let mut out = String::from("pair,s,mass");
    for k in 0..dim {
        let _ = write!(out, ",x{k}");
    }
    out.push('\n');
    for (i, p) in plan.pairs.iter().enumerate() {
        for (s, e) in &p.curve.samples {
            let _ = write!(out, "{i},{s},{}", p.mass);
            for c in &e.coords {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
    }
    out
}

/// Per-cell densities of a measure with respect to the reference measure.
///
/// `density` is dense over all cells of the space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityField {
    pub density: Vec<f64>,
    pub singular_mass: f64,
}

impl DensityField {
    /// A measure with no absolutely continuous part.
    pub fn singular(space: &SampledSpace, mass: f64) -> Self {
        DensityField { density: vec![0.0; space.len()], singular_mass: mass }
    }

    /// Indices of cells with positive density.
    pub fn cells(&self) -> Vec<usize> {
        (0..self.density.len()).filter(|&i| self.density[i] > 0.0).collect()
    }

    pub fn sup(&self) -> f64 {
        self.density.iter().copied().fold(0.0, f64::max)
    }

    pub fn ac_mass(&self, space: &SampledSpace) -> f64 {
        self.density.iter().zip(space.masses()).map(|(r, m)| r * m).sum()
    }

    /// Cell-wise mass `ρ_i·m_i`.
    pub fn cell_masses(&self, space: &SampledSpace) -> Vec<f64> {
        self.density.iter().zip(space.masses()).map(|(r, m)| r * m).collect()
    }

    /// Density of the cell containing `x` (0 outside the window).
    pub fn at(&self, space: &SampledSpace, x: &Event) -> f64 {
        space.locate(x).map_or(0.0, |i| self.density[i])
    }
}

fn histogram(mu: &DiscreteMeasure, space: &SampledSpace, strict: bool) -> Result<DensityField> {
    let mut mass = vec![0.0; space.len()];
    let mut singular = 0.0;
    for (a, &w) in mu.atoms.iter().zip(&mu.weights) {
        match space.locate(a) {
            Some(i) => mass[i] += w,
            None if strict => return Err(Error::OutsideWindow(a.coords.to_vec())),
            None => singular += w,
        }
    }
    let density = mass.iter().zip(space.masses()).map(|(w, m)| w / m).collect();
    Ok(DensityField { density, singular_mass: singular })
}

/// Nearest-cell histogram density of every atom.
pub fn density_estimate(mu: &DiscreteMeasure, space: &SampledSpace) -> Result<DensityField> {
    histogram(mu, space, true)
}

/// Density of the absolutely continuous part: measures not flagged `is_ac`
/// are entirely singular, and atoms outside the window count as singular.
pub fn density_of(mu: &DiscreteMeasure, space: &SampledSpace) -> DensityField {
    if !mu.is_ac {
        return DensityField::singular(space, mu.total_mass());
    }
    histogram(mu, space, false).expect("lenient histogram never fails")
}
