//! Shared helpers for integration tests: an exhaustive LP oracle and random
//! instance generators.
#![allow(dead_code)]

use lorot::spacetime::{CausalKernel, Event};
use lorot::transport::DiscreteMeasure;
use lorot::ExtReal;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

const RANK_EPS: f64 = 1e-10;

fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..=(n - (k - cur.len())) {
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), f);
    }
}

/// `ℓ_p` by enumerating every basic solution of the transportation polytope
/// restricted to causal pairs. Intended for at most 4×4 atoms.
pub fn brute_force_lp(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure, p: f64, kernel: &dyn CausalKernel) -> ExtReal {
    let (m, n) = (mu0.len(), mu1.len());
    let mut cols = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if kernel.is_causal(&mu0.atoms[i], &mu1.atoms[j]) {
                cols.push((i, j, kernel.tau(&mu0.atoms[i], &mu1.atoms[j]).powf(p)));
            }
        }
    }
    if cols.is_empty() {
        return ExtReal::NegInf;
    }
    let a_full = DMatrix::from_fn(m + n, cols.len(), |r, c| {
        let (i, j, _) = cols[c];
        if r == i || r == m + j {
            1.0
        } else {
            0.0
        }
    });
    let b = DVector::from_iterator(m + n, mu0.weights.iter().chain(&mu1.weights).copied());
    let rank = a_full.rank(RANK_EPS);
    let mut best: Option<f64> = None;
    for_each_subset(cols.len(), rank, &mut |subset| {
        let a = a_full.select_columns(subset);
        let svd = a.clone().svd(true, true);
        if svd.rank(RANK_EPS) < rank {
            return;
        }
        let Ok(x) = svd.solve(&b, RANK_EPS) else { return };
        if (&a * &x - &b).amax() > 1e-10 || x.iter().any(|&v| v < -1e-12) {
            return;
        }
        let value: f64 = subset.iter().zip(x.iter()).map(|(&c, &v)| v.max(0.0) * cols[c].2).sum();
        best = Some(best.map_or(value, |b: f64| b.max(value)));
    });
    match best {
        Some(v) => ExtReal::Finite(v.powf(1.0 / p)),
        None => ExtReal::NegInf,
    }
}

/// `k` atoms with times in `[t0, t1]`, positions in `[-x, x]` and random
/// weights, normalized to a probability measure.
pub fn random_measure(rng: &mut impl Rng, k: usize, t0: f64, t1: f64, x: f64) -> DiscreteMeasure {
    let atoms = (0..k)
        .map(|_| Event::new(&[rng.random_range(t0..=t1), rng.random_range(-x..=x)]))
        .collect();
    let weights = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    DiscreteMeasure::normalized(atoms, weights, false).unwrap()
}

/// Compares extended reals up to an absolute tolerance.
pub fn ext_close(a: ExtReal, b: ExtReal, tol: f64) -> bool {
    match (a, b) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => (x - y).abs() <= tol,
        _ => a == b,
    }
}
