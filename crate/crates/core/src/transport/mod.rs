//! ℓ_p-optimal transport between discrete measures over causal couplings.

pub mod simplex;

use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::report::{CheckReport, ReportEntry};
use crate::spacetime::{CausalKernel, Event, SampledSpace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

const WEIGHT_TOL: f64 = 1e-9;
const MARGINAL_TOL: f64 = 1e-10;

/// A finitely supported probability measure.
///
/// Atoms are events rather than grid indices so that interpolants, which
/// sit between cell centers, stay representable. Measures built on a grid
/// remember their cells in `cells`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Event>,
    pub weights: Vec<f64>,
    pub cells: Option<Vec<usize>>,
    /// The measure stands for an 𝔪-absolutely continuous distribution.
    pub is_ac: bool,
}

impl DiscreteMeasure {
    /// Validates weights (nonnegative, summing to 1 within 1e−9).
    pub fn new(atoms: Vec<Event>, weights: Vec<f64>, is_ac: bool) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(invalid(format!("{} atoms but {} weights", atoms.len(), weights.len())));
        }
        if atoms.is_empty() {
            return Err(invalid("a measure needs at least one atom"));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(invalid("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(invalid(format!("weights sum to {total}, expected 1")));
        }
        Ok(DiscreteMeasure { atoms, weights, cells: None, is_ac })
    }

    /// Normalizes arbitrary nonnegative weights to total mass 1.
    pub fn normalized(atoms: Vec<Event>, weights: Vec<f64>, is_ac: bool) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(invalid("weights must have positive total"));
        }
        let w = weights.iter().map(|x| x / total).collect();
        Self::new(atoms, w, is_ac)
    }

    pub fn dirac(x: Event) -> Self {
        DiscreteMeasure { atoms: vec![x], weights: vec![1.0], cells: None, is_ac: false }
    }

    /// Normalized reference measure restricted to `cells`.
    pub fn uniform_on_cells(space: &SampledSpace, cells: &[usize]) -> Result<Self> {
        let density = vec![1.0; cells.len()];
        Self::from_density(space, cells, &density)
    }

    /// `ρ𝔪` restricted to `cells`, normalized.
    pub fn from_density(space: &SampledSpace, cells: &[usize], density: &[f64]) -> Result<Self> {
        if cells.is_empty() {
            return Err(invalid("empty support"));
        }
        let atoms = cells.iter().map(|&c| space.point(c).clone()).collect();
        let w = cells
            .iter()
            .zip(density)
            .map(|(&c, &r)| r * space.mass(c))
            .collect();
        let mut mu = Self::normalized(atoms, w, true)?;
        mu.cells = Some(cells.to_vec());
        Ok(mu)
    }

    /// Normalized reference measure on the cells whose centers lie in the
    /// box `[lo, hi]`. With `subsample = k > 1` each cell's mass is split
    /// evenly over a `k^(n+1)` lattice of sub-cell centers.
    pub fn uniform_on_box(space: &SampledSpace, lo: &[f64], hi: &[f64], subsample: usize) -> Result<Self> {
        let cells = space.cells_in_box(lo, hi);
        if cells.is_empty() {
            return Err(invalid("the box contains no cell centers"));
        }
        if subsample <= 1 {
            return Self::uniform_on_cells(space, &cells);
        }
        let d = space.bounds().len();
        let widths = space.cell_widths();
        let per_cell = subsample.pow(d as u32);
        let mut atoms = Vec::with_capacity(cells.len() * per_cell);
        let mut w = Vec::with_capacity(cells.len() * per_cell);
        for &c in &cells {
            let center = space.point(c);
            for code in 0..per_cell {
                let mut k = code;
                let coords: Vec<f64> = (0..d)
                    .map(|ax| {
                        let i = k % subsample;
                        k /= subsample;
                        let off = (i as f64 + 0.5) / subsample as f64 - 0.5;
                        center.coords[ax] + off * widths[ax]
                    })
                    .collect();
                atoms.push(Event::from(coords));
                w.push(space.mass(c) / per_cell as f64);
            }
        }
        Self::normalized(atoms, w, true)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// A coupling stored as sparse `(row, col, mass)` triplets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
    pub causal: bool,
    pub chronological: bool,
    pub value_p: ExtReal,
}

impl Coupling {
    /// Builds a coupling and fills its causality flags and ℓ_p value.
    pub fn new(
        mu0: &DiscreteMeasure,
        mu1: &DiscreteMeasure,
        entries: Vec<(usize, usize, f64)>,
        p: f64,
        kernel: &dyn CausalKernel,
    ) -> Self {
        let mut c = Coupling {
            rows: mu0.len(),
            cols: mu1.len(),
            entries,
            causal: true,
            chronological: true,
            value_p: ExtReal::NegInf,
        };
        let mut sum = 0.0;
        for &(i, j, m) in &c.entries {
            if m <= 0.0 {
                continue;
            }
            let (x, y) = (&mu0.atoms[i], &mu1.atoms[j]);
            c.causal &= kernel.is_causal(x, y);
            c.chronological &= kernel.is_chronological(x, y);
            sum += m * kernel.tau(x, y).powf(p);
        }
        if c.causal {
            c.value_p = ExtReal::Finite(sum.powf(1.0 / p));
        }
        c
    }

    pub fn product(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure, p: f64, kernel: &dyn CausalKernel) -> Self {
        let mut e = Vec::with_capacity(mu0.len() * mu1.len());
        for (i, a) in mu0.weights.iter().enumerate() {
            for (j, b) in mu1.weights.iter().enumerate() {
                if a * b > 0.0 {
                    e.push((i, j, a * b));
                }
            }
        }
        Self::new(mu0, mu1, e, p, kernel)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.rows];
        for &(i, _, m) in &self.entries {
            r[i] += m;
        }
        r
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.cols];
        for &(_, j, m) in &self.entries {
            c[j] += m;
        }
        c
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for &(i, j, m) in &self.entries {
            d[i][j] += m;
        }
        d
    }

    pub fn positive_entries(&self) -> usize {
        self.entries.iter().filter(|e| e.2 > 0.0).count()
    }

    /// Largest marginal error against `mu0`, `mu1`.
    pub fn marginal_error(&self, mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> f64 {
        let r = self.row_sums();
        let c = self.col_sums();
        r.iter()
            .zip(&mu0.weights)
            .chain(c.iter().zip(&mu1.weights))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Fraction of first-marginal mass split across two or more targets.
    pub fn monge_defect(&self) -> f64 {
        let mut count = vec![0usize; self.rows];
        let mut mass = vec![0.0; self.rows];
        for &(i, _, m) in &self.entries {
            if m > 0.0 {
                count[i] += 1;
                mass[i] += m;
            }
        }
        let total: f64 = mass.iter().sum();
        let split: f64 = mass.iter().zip(&count).filter(|(_, &c)| c >= 2).map(|(m, _)| m).sum();
        if total > 0.0 {
            split / total
        } else {
            0.0
        }
    }

    /// Number of rows carrying positive mass to two or more targets.
    pub fn split_rows(&self) -> usize {
        let mut count = vec![0usize; self.rows];
        for &(i, _, m) in &self.entries {
            if m > 0.0 {
                count[i] += 1;
            }
        }
        count.iter().filter(|&&c| c >= 2).count()
    }

    /// CSV triplets `i,j,mass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,mass\n");
        for &(i, j, m) in &self.entries {
            let _ = writeln!(out, "{i},{j},{m}");
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportResult {
    pub coupling: Coupling,
    pub objective: ExtReal,
    pub feasible: bool,
    pub monge_defect: f64,
    pub p: f64,
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("p must lie in (0,1], got {p}")));
    }
    Ok(())
}

/// `‖τ‖_{L^p(π)}` for one coupling; `-inf` when mass sits on a non-causal pair.
pub fn lp_cost(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    coupling: &Coupling,
    p: f64,
    kernel: &dyn CausalKernel,
) -> Result<ExtReal> {
    check_p(p)?;
    let err = coupling.marginal_error(mu0, mu1);
    if err > MARGINAL_TOL {
        return Err(Error::MarginalMismatch(format!("coupling marginals off by {err:e}")));
    }
    Ok(Coupling::new(mu0, mu1, coupling.entries.clone(), p, kernel).value_p)
}

/// Maximizes `Σ π_ij τ_ij^p` over causal couplings.
pub fn solve_lp_optimal(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    p: f64,
    kernel: &dyn CausalKernel,
) -> Result<TransportResult> {
    solve_lp_penalized(mu0, mu1, p, kernel, None)
}

/// As [`solve_lp_optimal`], with the gain of arc `(i, j)` lowered by
/// `penalty(i, j)`. The reported objective is the unpenalized ℓ_p value.
pub fn solve_lp_penalized(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    p: f64,
    kernel: &dyn CausalKernel,
    penalty: Option<&(dyn Fn(usize, usize) -> f64 + Sync)>,
) -> Result<TransportResult> {
    check_p(p)?;
    let (s0, s1) = (mu0.total_mass(), mu1.total_mass());
    if (s0 - s1).abs() > WEIGHT_TOL {
        return Err(Error::MarginalMismatch(format!("total masses {s0} and {s1} differ")));
    }
    let rows: Vec<usize> = (0..mu0.len()).filter(|&i| mu0.weights[i] > 0.0).collect();
    let cols: Vec<usize> = (0..mu1.len()).filter(|&j| mu1.weights[j] > 0.0).collect();

    let arcs: Vec<simplex::Arc> = rows
        .par_iter()
        .enumerate()
        .flat_map_iter(|(a, &i)| {
            let x = &mu0.atoms[i];
            cols.iter().enumerate().filter_map(move |(b, &j)| {
                let y = &mu1.atoms[j];
                if !kernel.is_causal(x, y) {
                    return None;
                }
                let mut gain = kernel.tau(x, y).powf(p);
                if let Some(pen) = penalty {
                    gain -= pen(i, j);
                }
                Some(simplex::Arc { from: a, to: b, gain })
            })
        })
        .collect();

    let supply: Vec<f64> = rows.iter().map(|&i| mu0.weights[i]).collect();
    let mut demand: Vec<f64> = cols.iter().map(|&j| mu1.weights[j]).collect();
    // absorb rounding in the totals into the largest demand
    let diff: f64 = supply.iter().sum::<f64>() - demand.iter().sum::<f64>();
    if let Some(k) = (0..demand.len()).max_by(|&a, &b| demand[a].total_cmp(&demand[b])) {
        demand[k] += diff;
    }
    let sol = simplex::max_gain_transport(&supply, &demand, &arcs);

    if !sol.feasible {
        let coupling = Coupling {
            rows: mu0.len(),
            cols: mu1.len(),
            entries: Vec::new(),
            causal: false,
            chronological: false,
            value_p: ExtReal::NegInf,
        };
        return Ok(TransportResult {
            coupling,
            objective: ExtReal::NegInf,
            feasible: false,
            monge_defect: 0.0,
            p,
        });
    }
    let mut entries: Vec<(usize, usize, f64)> = sol
        .flows
        .iter()
        .map(|&(a, f)| (rows[arcs[a].from], cols[arcs[a].to], f))
        .collect();
    entries.sort_by_key(|x| (x.0, x.1));
    let coupling = Coupling::new(mu0, mu1, entries, p, kernel);
    Ok(TransportResult {
        objective: coupling.value_p,
        feasible: true,
        monge_defect: coupling.monge_defect(),
        coupling,
        p,
    })
}

/// Sufficient condition for strong timelike p-dualizability: every pair of
/// support points is chronologically related.
pub fn is_strongly_dualizable_sufficient(
    mu0: &DiscreteMeasure,
    mu1: &DiscreteMeasure,
    kernel: &dyn CausalKernel,
) -> bool {
    mu0.atoms
        .par_iter()
        .zip(&mu0.weights)
        .filter(|(_, &w)| w > 0.0)
        .all(|(x, _)| {
            mu1.atoms
                .iter()
                .zip(&mu1.weights)
                .filter(|(_, &w)| w > 0.0)
                .all(|(y, _)| kernel.is_chronological(x, y))
        })
}

/// The returned optimal coupling witnesses timelike p-dualizability.
pub fn is_timelike_dualizable(result: &TransportResult) -> bool {
    result.feasible && result.coupling.chronological
}

/// `ℓ_p(μ,σ) ≥ ℓ_p(μ,ν) + ℓ_p(ν,σ)`.
pub fn verify_lp_reverse_triangle(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    sigma_m: &DiscreteMeasure,
    p: f64,
    kernel: &dyn CausalKernel,
) -> Result<CheckReport> {
    let a = solve_lp_optimal(mu, nu, p, kernel)?.objective;
    let b = solve_lp_optimal(nu, sigma_m, p, kernel)?.objective;
    let c = solve_lp_optimal(mu, sigma_m, p, kernel)?.objective;
    let mut r = CheckReport::new("lp_reverse_triangle", serde_json::json!({ "p": p }), 1e-9);
    r.push(ReportEntry::new(None, None, a + b, c));
    r.quantity("l_mu_nu", a.to_f64());
    r.quantity("l_nu_sigma", b.to_f64());
    r.quantity("l_mu_sigma", c.to_f64());
    Ok(r.finalize())
}

/// One weighted atom of a JSON transport problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub at: Event,
    pub weight: f64,
}

/// `{"mu0": [...], "mu1": [...], "p": 0.5}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportProblem {
    pub mu0: Vec<AtomSpec>,
    pub mu1: Vec<AtomSpec>,
    pub p: f64,
}

impl TransportProblem {
    pub fn measures(&self) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
        let build = |v: &[AtomSpec]| {
            DiscreteMeasure::normalized(
                v.iter().map(|a| a.at.clone()).collect(),
                v.iter().map(|a| a.weight).collect(),
                false,
            )
        };
        Ok((build(&self.mu0)?, build(&self.mu1)?))
    }

    pub fn solve(&self, kernel: &dyn CausalKernel) -> Result<TransportResult> {
        let (a, b) = self.measures()?;
        solve_lp_optimal(&a, &b, self.p, kernel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::minkowski_kernel;
    use approx::assert_relative_eq;

    fn ev(c: &[f64]) -> Event {
        Event::new(c)
    }

    #[test]
    fn lp_cost_examples() {
        let k = minkowski_kernel(1);
        let x = DiscreteMeasure::dirac(ev(&[0.0, 0.0]));
        let y = DiscreteMeasure::dirac(ev(&[5.0, 3.0]));
        let c = Coupling::product(&x, &y, 0.5, &k);
        assert_relative_eq!(lp_cost(&x, &y, &c, 0.5, &k).unwrap().to_f64(), 4.0, epsilon = 1e-14);
        let z = DiscreteMeasure::dirac(ev(&[0.0, 1.0]));
        let c = Coupling::product(&x, &z, 0.5, &k);
        assert_eq!(lp_cost(&x, &z, &c, 0.5, &k).unwrap(), ExtReal::NegInf);
        let n = DiscreteMeasure::dirac(ev(&[1.0, 1.0]));
        let c = Coupling::product(&x, &n, 0.5, &k);
        assert_eq!(lp_cost(&x, &n, &c, 0.5, &k).unwrap(), ExtReal::ZERO);
        assert!(lp_cost(&x, &n, &c, 0.0, &k).is_err());
        assert!(lp_cost(&x, &n, &c, 1.5, &k).is_err());
        let bad = Coupling { entries: vec![(0, 0, 0.5)], ..c };
        assert!(matches!(lp_cost(&x, &n, &bad, 0.5, &k), Err(Error::MarginalMismatch(_))));
    }

    #[test]
    fn solve_examples() {
        let k = minkowski_kernel(1);
        let x = DiscreteMeasure::dirac(ev(&[0.0, 0.0]));
        let y = DiscreteMeasure::dirac(ev(&[3.0, 0.0]));
        for p in [0.1, 0.5, 1.0] {
            let r = solve_lp_optimal(&x, &y, p, &k).unwrap();
            assert_relative_eq!(r.objective.to_f64(), 3.0, epsilon = 1e-12);
        }
        let a = DiscreteMeasure::new(vec![ev(&[0.0, 0.0]), ev(&[0.0, 10.0])], vec![0.5, 0.5], false).unwrap();
        let b = DiscreteMeasure::new(vec![ev(&[0.0, 3.0]), ev(&[0.0, 5.0])], vec![0.5, 0.5], false).unwrap();
        let r = solve_lp_optimal(&a, &b, 0.5, &k).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.objective, ExtReal::NegInf);
        assert!(!is_timelike_dualizable(&r));
    }

    #[test]
    fn two_by_two_tau_matrix() {
        // tau = [[2,1],[1,2]], masses 1/2, p = 1/2: diagonal coupling, objective 2
        let g = |t: f64| t.sqrt();
        let arcs = [
            simplex::Arc { from: 0, to: 0, gain: g(2.0) },
            simplex::Arc { from: 0, to: 1, gain: g(1.0) },
            simplex::Arc { from: 1, to: 0, gain: g(1.0) },
            simplex::Arc { from: 1, to: 1, gain: g(2.0) },
        ];
        let s = simplex::max_gain_transport(&[0.5, 0.5], &[0.5, 0.5], &arcs);
        assert_relative_eq!(s.objective.powf(2.0), 2.0, epsilon = 1e-12);
        let mut used: Vec<usize> = s.flows.iter().map(|f| f.0).collect();
        used.sort();
        assert_eq!(used, vec![0, 3]);
    }

    #[test]
    fn two_by_two_against_coupling_family() {
        let k = minkowski_kernel(1);
        let a = DiscreteMeasure::new(vec![ev(&[0.0, 0.0]), ev(&[0.0, 1.0])], vec![0.5, 0.5], false).unwrap();
        let b = DiscreteMeasure::new(vec![ev(&[2.0, 0.0]), ev(&[2.0, 1.0])], vec![0.5, 0.5], false).unwrap();
        let r = solve_lp_optimal(&a, &b, 0.5, &k).unwrap();
        let tau = |i: usize, j: usize| k.tau(&a.atoms[i], &b.atoms[j]).sqrt();
        let best = (0..=1000)
            .map(|s| {
                let q = 0.5 * s as f64 / 1000.0;
                let v = q * (tau(0, 0) + tau(1, 1)) + (0.5 - q) * (tau(0, 1) + tau(1, 0));
                v * v
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(r.objective.to_f64(), best, max_relative = 1e-9);
    }

    #[test]
    fn dualizability_flags() {
        let k = minkowski_kernel(1);
        let a = DiscreteMeasure::new(vec![ev(&[0.0, 0.0]), ev(&[0.0, 0.1])], vec![0.5, 0.5], false).unwrap();
        let b = DiscreteMeasure::new(vec![ev(&[4.0, 0.0]), ev(&[4.0, 0.1])], vec![0.5, 0.5], false).unwrap();
        assert!(is_strongly_dualizable_sufficient(&a, &b, &k));
        assert!(!is_strongly_dualizable_sufficient(&a, &a, &k));
        let c = DiscreteMeasure::new(vec![ev(&[1.0, 1.0]), ev(&[4.0, 0.1])], vec![0.5, 0.5], false).unwrap();
        assert!(!is_strongly_dualizable_sufficient(&a, &c, &k));
        let r = solve_lp_optimal(&a, &b, 0.5, &k).unwrap();
        assert!(is_timelike_dualizable(&r));
        // marginals force mass onto the null pair (0,0) -> (1,1)
        let x = DiscreteMeasure::dirac(ev(&[0.0, 0.0]));
        let n = DiscreteMeasure::dirac(ev(&[1.0, 1.0]));
        let r = solve_lp_optimal(&x, &n, 0.5, &k).unwrap();
        assert!(r.feasible);
        assert!(!is_timelike_dualizable(&r));
    }

    #[test]
    fn reverse_triangle_examples() {
        let k = minkowski_kernel(1);
        let mu = DiscreteMeasure::dirac(ev(&[0.0, 0.0]));
        let nu = DiscreteMeasure::dirac(ev(&[1.0, 0.0]));
        let si = DiscreteMeasure::dirac(ev(&[2.0, 0.0]));
        let r = verify_lp_reverse_triangle(&mu, &nu, &si, 0.5, &k).unwrap();
        assert!(r.pass);
        assert!(r.worst_margin.to_f64().abs() < 1e-12);
        let far = DiscreteMeasure::dirac(ev(&[1.0, 5.0]));
        let r = verify_lp_reverse_triangle(&mu, &far, &si, 0.5, &k).unwrap();
        assert!(r.pass);
        assert_eq!(r.entries[0].lhs, ExtReal::NegInf);
    }

    #[test]
    fn problem_json_and_csv() {
        let k = minkowski_kernel(1);
        let prob: TransportProblem = serde_json::from_str(
            r#"{"mu0": [{"at": [0, 0], "weight": 1}], "mu1": [{"at": [5, 3], "weight": 2}], "p": 0.5}"#,
        )
        .unwrap();
        let r = prob.solve(&k).unwrap();
        assert_relative_eq!(r.objective.to_f64(), 4.0, epsilon = 1e-12);
        assert_eq!(r.coupling.to_csv(), "i,j,mass\n0,0,1\n");
    }

    #[test]
    fn box_subsampling_preserves_mass() {
        use crate::spacetime::{build_grid_space, Weight};
        let s = build_grid_space(&[[0.0, 2.0], [0.0, 2.0]], &[4, 4], Weight::Zero).unwrap();
        let m = DiscreteMeasure::uniform_on_box(&s, &[0.0, 0.0], &[1.0, 1.0], 3).unwrap();
        assert_eq!(m.len(), 4 * 9);
        assert_relative_eq!(m.total_mass(), 1.0, epsilon = 1e-14);
        for a in &m.atoms {
            assert!(a.coords.iter().all(|&c| c > 0.0 && c < 1.0));
        }
    }
}
