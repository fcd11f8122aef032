//! Smooth weighted flat models: Bakry–Émery Ricci, Jacobians along affine
//! transports, the Riccati flow and the distortion-concavity inequality.
//!
//! Vectors use the signature `(+, −, …, −)`, so `⟨ξ,ξ⟩ > 0` for timelike ξ.

use crate::coeffs::{sigma_kn, tau_kn};
use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::report::{CheckReport, ReportEntry};
use nalgebra::{DMatrix, DVector};

/// Minkowski product `ξ₀η₀ − Σ ξᵢηᵢ`.
pub fn minkowski_dot(a: &[f64], b: &[f64]) -> f64 {
    a[0] * b[0] - a[1..].iter().zip(&b[1..]).map(|(x, y)| x * y).sum::<f64>()
}

/// A smooth weight potential `V`.
pub trait ScalarField: Send + Sync {
    fn value(&self, z: &[f64]) -> f64;
    /// Coordinate partial derivatives `∂ᵢV`.
    fn gradient(&self, z: &[f64]) -> DVector<f64>;
    /// Coordinate second derivatives `∂ᵢ∂ⱼV`.
    fn hessian(&self, z: &[f64]) -> DMatrix<f64>;
    fn is_constant(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConstantField {
    pub value: f64,
    pub dim: usize,
}

impl ScalarField for ConstantField {
    fn value(&self, _: &[f64]) -> f64 {
        self.value
    }
    fn gradient(&self, _: &[f64]) -> DVector<f64> {
        DVector::zeros(self.dim)
    }
    fn hessian(&self, _: &[f64]) -> DMatrix<f64> {
        DMatrix::zeros(self.dim, self.dim)
    }
    fn is_constant(&self) -> bool {
        true
    }
}

/// `V(z) = ½ zᵀAz + bᵀz + c` with `A` symmetric.
#[derive(Clone, Debug)]
pub struct QuadraticField {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
}

impl QuadraticField {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: f64) -> Result<Self> {
        if !a.is_square() || a.nrows() != b.len() {
            return Err(invalid("quadratic field needs a square A matching b"));
        }
        if (&a - a.transpose()).amax() > 1e-12 * (1.0 + a.amax()) {
            return Err(invalid("quadratic field needs a symmetric A"));
        }
        Ok(QuadraticField { a, b, c })
    }

    /// `(λ/2)⟨z,z⟩` in the Minkowski product.
    pub fn lorentzian(lambda: f64, dim: usize) -> Self {
        let mut a = DMatrix::from_diagonal_element(dim, dim, -lambda);
        a[(0, 0)] = lambda;
        QuadraticField { a, b: DVector::zeros(dim), c: 0.0 }
    }
}

impl ScalarField for QuadraticField {
    fn value(&self, z: &[f64]) -> f64 {
        let z = DVector::from_column_slice(z);
        0.5 * z.dot(&(&self.a * &z)) + self.b.dot(&z) + self.c
    }
    fn gradient(&self, z: &[f64]) -> DVector<f64> {
        &self.a * DVector::from_column_slice(z) + &self.b
    }
    fn hessian(&self, _: &[f64]) -> DMatrix<f64> {
        self.a.clone()
    }
    fn is_constant(&self) -> bool {
        self.a.amax() == 0.0 && self.b.amax() == 0.0
    }
}

/// Derivatives by central differences with step `1e-4·scale`.
pub struct FiniteDifferenceField<F> {
    f: F,
    dim: usize,
    step: f64,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> FiniteDifferenceField<F> {
    pub fn new(f: F, dim: usize, scale: f64) -> Self {
        FiniteDifferenceField { f, dim, step: 1e-4 * scale }
    }

    fn shifted(&self, z: &[f64], moves: &[(usize, f64)]) -> f64 {
        let mut w = z.to_vec();
        for &(i, d) in moves {
            w[i] += d;
        }
        (self.f)(&w)
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> ScalarField for FiniteDifferenceField<F> {
    fn value(&self, z: &[f64]) -> f64 {
        (self.f)(z)
    }

    fn gradient(&self, z: &[f64]) -> DVector<f64> {
        let h = self.step;
        DVector::from_fn(self.dim, |i, _| (self.shifted(z, &[(i, h)]) - self.shifted(z, &[(i, -h)])) / (2.0 * h))
    }

    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        let h = self.step;
        let f0 = (self.f)(z);
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            m[(i, i)] = (self.shifted(z, &[(i, h)]) - 2.0 * f0 + self.shifted(z, &[(i, -h)])) / (h * h);
            for j in 0..i {
                let v = (self.shifted(z, &[(i, h), (j, h)]) - self.shifted(z, &[(i, h), (j, -h)])
                    - self.shifted(z, &[(i, -h), (j, h)])
                    + self.shifted(z, &[(i, -h), (j, -h)]))
                    / (4.0 * h * h);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }
}

/// Minkowski `ℝ^{1,n−1}` with reference measure weighted by `V` and
/// synthetic dimension `N ≥ n`.
pub struct WeightedFlatModel {
    pub n: usize,
    pub big_n: f64,
    pub potential: Box<dyn ScalarField>,
}

impl WeightedFlatModel {
    pub fn new(n: usize, big_n: f64, potential: Box<dyn ScalarField>) -> Result<Self> {
        if n < 2 {
            return Err(invalid("the model needs dimension n >= 2"));
        }
        if !(big_n >= n as f64) {
            return Err(invalid(format!("N = {big_n} must be >= n = {n}")));
        }
        if big_n == n as f64 && !potential.is_constant() {
            return Err(invalid("N = n requires a constant potential"));
        }
        Ok(WeightedFlatModel { n, big_n, potential })
    }

    /// The unweighted model, `V ≡ 0`.
    pub fn flat(n: usize, big_n: f64) -> Result<Self> {
        Self::new(n, big_n, Box::new(ConstantField { value: 0.0, dim: n }))
    }
}

/// `Ric^{N,V}(ξ,ξ) = Hess V(ξ,ξ) − ⟨DV,ξ⟩²/(N − n)` (flat `Ric = 0`).
pub fn bakry_emery_ricci(model: &WeightedFlatModel, x: &[f64], xi: &[f64]) -> Result<f64> {
    if x.len() != model.n || xi.len() != model.n {
        return Err(invalid("point and direction must have the model dimension"));
    }
    if !(minkowski_dot(xi, xi) > 0.0) {
        return Err(invalid("direction must be timelike"));
    }
    let v = &model.potential;
    if v.is_constant() {
        return Ok(0.0);
    }
    if model.big_n == model.n as f64 {
        return Err(invalid("N = n requires a constant potential"));
    }
    let xi_v = DVector::from_column_slice(xi);
    let hess = xi_v.dot(&(v.hessian(x) * &xi_v));
    let dv = v.gradient(x).dot(&xi_v);
    Ok(hess - dv * dv / (model.big_n - model.n as f64))
}

/// An affine transport field `X(x) = DX·x + b`, moving along `T_t(x) = x + tX(x)`.
#[derive(Clone, Debug)]
pub struct TransportField {
    pub dx: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl TransportField {
    pub fn linear(dx: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        if !dx.is_square() || dx.nrows() != offset.len() {
            return Err(invalid("transport field needs a square DX matching the offset"));
        }
        Ok(TransportField { dx, offset })
    }

    pub fn translation(offset: DVector<f64>) -> Self {
        let n = offset.len();
        TransportField { dx: DMatrix::zeros(n, n), offset }
    }

    pub fn value(&self, x: &[f64]) -> DVector<f64> {
        &self.dx * DVector::from_column_slice(x) + &self.offset
    }

    pub fn jacobian(&self, _x: &[f64]) -> DMatrix<f64> {
        self.dx.clone()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JacobianRecord {
    pub t: f64,
    /// `A_t = I + t·DX(x)`.
    pub a: DMatrix<f64>,
    /// `j_t = |det A_t| e^{V(T_t(x))}`.
    pub j: f64,
    /// `φ_t = log j_t`.
    pub phi: f64,
}

const SINGULAR_DET: f64 = 1e-12;

/// Evaluates `A_t`, `j_t` and `φ_t` along the transport line from `x`.
/// Fails at the first `t` of the (sorted) grid where `A_t` is singular.
pub fn jacobian_along_transport(
    model: &WeightedFlatModel,
    field: &TransportField,
    x: &[f64],
    t_grid: &[f64],
) -> Result<Vec<JacobianRecord>> {
    if x.len() != model.n || field.dx.nrows() != model.n {
        return Err(invalid("point and field must have the model dimension"));
    }
    let xv = DVector::from_column_slice(x);
    let dir = field.value(x);
    let dx = field.jacobian(x);
    let mut times = t_grid.to_vec();
    times.sort_by(f64::total_cmp);
    times
        .into_iter()
        .map(|t| {
            let a = DMatrix::identity(model.n, model.n) + &dx * t;
            let det = a.determinant();
            if det.abs() < SINGULAR_DET {
                return Err(Error::Singular(t));
            }
            let pos = &xv + &dir * t;
            let v = model.potential.value(pos.as_slice());
            let phi = det.abs().ln() + v;
            Ok(JacobianRecord { t, a, j: phi.exp(), phi })
        })
        .collect()
}

/// `B_t = B0 (I + t B0)^{−1}`, the flat solution of `Ḃ + B² = 0`.
pub fn riccati_flat(b0: &DMatrix<f64>, t_grid: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    if !b0.is_square() {
        return Err(invalid("B0 must be square"));
    }
    let n = b0.nrows();
    t_grid
        .iter()
        .map(|&t| {
            let m = DMatrix::identity(n, n) + b0 * t;
            if m.determinant().abs() < SINGULAR_DET {
                return Err(Error::Singular(t));
            }
            let inv = m.try_inverse().ok_or(Error::Singular(t))?;
            Ok(b0 * inv)
        })
        .collect()
}

/// RK4 integration of `Ḃ = −B²` from 0 to `t_end`.
pub fn integrate_riccati_rk4(b0: &DMatrix<f64>, t_end: f64, steps: usize) -> DMatrix<f64> {
    let h = t_end / steps.max(1) as f64;
    let f = |b: &DMatrix<f64>| -(b * b);
    let mut b = b0.clone();
    for _ in 0..steps.max(1) {
        let k1 = f(&b);
        let k2 = f(&(&b + &k1 * (h / 2.0)));
        let k3 = f(&(&b + &k2 * (h / 2.0)));
        let k4 = f(&(&b + &k3 * h));
        b += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    b
}

/// RK4 for `y'' = −c·y`, returning `y` on a uniform grid of `steps + 1`
/// nodes over `[0, 1]`.
fn linear_oscillator(c: f64, y0: f64, v0: f64, steps: usize) -> Vec<f64> {
    let h = 1.0 / steps as f64;
    let (mut y, mut v) = (y0, v0);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y);
    for _ in 0..steps {
        let (k1y, k1v) = (v, -c * y);
        let (k2y, k2v) = (v + 0.5 * h * k1v, -c * (y + 0.5 * h * k1y));
        let (k3y, k3v) = (v + 0.5 * h * k2v, -c * (y + 0.5 * h * k2y));
        let (k4y, k4v) = (v + h * k3v, -c * (y + h * k3y));
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        out.push(y);
    }
    out
}

const ODE_STEPS: usize = 4096;

fn sample(values: &[f64], t: f64) -> f64 {
    let n = values.len() - 1;
    let x = t * n as f64;
    let k = (x.floor() as usize).min(n - 1);
    let s = x - k as f64;
    if s == 0.0 {
        values[k]
    } else {
        // cubic Lagrange through four nodes around t
        let lo = k.saturating_sub(1).min(n - 3);
        let nodes: Vec<f64> = (lo..lo + 4).map(|i| i as f64).collect();
        (0..4)
            .map(|a| {
                let w: f64 = (0..4)
                    .filter(|&b| b != a)
                    .map(|b| (x - nodes[b]) / (nodes[a] - nodes[b]))
                    .product();
                w * values[lo + a]
            })
            .sum()
    }
}

/// `j_t` solving the σ-equality case: `y = j^{1/N'}` with
/// `y'' = −(Kθ²/N') y` between the given endpoints.
pub fn sigma_equality_profile(k: f64, nprime: f64, theta: f64, j0: f64, j1: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
    let c = k * theta * theta / nprime;
    if c >= std::f64::consts::PI.powi(2) {
        return Err(Error::Domain(format!("K θ²/N' = {c} reaches π²")));
    }
    let u = linear_oscillator(c, 1.0, 0.0, ODE_STEPS);
    let v = linear_oscillator(c, 0.0, 1.0, ODE_STEPS);
    let (y0, y1) = (j0.powf(1.0 / nprime), j1.powf(1.0 / nprime));
    let (u1, v1) = (u[ODE_STEPS], v[ODE_STEPS]);
    Ok(t_grid
        .iter()
        .map(|&t| {
            let (ut, vt) = (sample(&u, t), sample(&v, t));
            let y = y0 * (ut - u1 / v1 * vt) + y1 * vt / v1;
            y.powf(nprime)
        })
        .collect())
}

/// `τ^{(t)}_{K,N'}(θ)` from the comparison ODE `w'' = −(Kθ²/(N'−1)) w`,
/// `w(0) = 0`, `w'(0) = 1`: the coefficient is `t^{1/N'} (w_t/w_1)^{1−1/N'}`.
pub fn tau_comparison_coefficients(k: f64, nprime: f64, theta: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
    if nprime == 1.0 {
        return Ok(t_grid.to_vec());
    }
    let c = k * theta * theta / (nprime - 1.0);
    if c >= std::f64::consts::PI.powi(2) {
        return Err(Error::Domain(format!("K θ²/(N'−1) = {c} reaches π²")));
    }
    let w = linear_oscillator(c, 0.0, 1.0, ODE_STEPS);
    let w1 = w[ODE_STEPS];
    Ok(t_grid
        .iter()
        .map(|&t| t.powf(1.0 / nprime) * (sample(&w, t) / w1).powf(1.0 - 1.0 / nprime))
        .collect())
}

/// Three-point second and first derivatives on a non-uniform grid.
fn derivatives(t: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    let (h0, h1) = (t[i] - t[i - 1], t[i + 1] - t[i]);
    let d1 = (-h1 / (h0 * (h0 + h1))) * y[i - 1] + ((h1 - h0) / (h0 * h1)) * y[i] + (h0 / (h1 * (h0 + h1))) * y[i + 1];
    let d2 = 2.0 * (y[i - 1] / (h0 * (h0 + h1)) - y[i] / (h0 * h1) + y[i + 1] / (h1 * (h0 + h1)));
    (d1, d2)
}

/// Checks the differential hypothesis `φ̈ + φ̇²/N' ≤ −Kθ²` (entries
/// `"hypothesis"`, tested as `N'ÿ/y ≤ −Kθ²` for `y = j^{1/N'}` with
/// O(h²) finite-difference slack) and the distortion inequalities
/// `j_t^{1/N'} ≥ c^{(1−t)}(θ) j_0^{1/N'} + c^{(t)}(θ) j_1^{1/N'}` for
/// `c = σ_{K,N'}` (entries `"sigma"`) and `c = τ_{K,N'}` (entries `"tau"`).
///
/// `pass` is false only when the hypothesis holds at every interior node
/// and a σ entry fails. The τ outcome is reported as the quantity
/// `tau_holds`.
pub fn verify_distortion_concavity(
    j_samples: &[(f64, f64)],
    theta: f64,
    k: f64,
    nprime: f64,
    tolerance: f64,
) -> Result<CheckReport> {
    if j_samples.len() < 3 {
        return Err(invalid("need at least three samples"));
    }
    if !(nprime >= 1.0) {
        return Err(invalid(format!("N' must be >= 1, got {nprime}")));
    }
    let mut samples = j_samples.to_vec();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    if samples[0].0 != 0.0 || samples[samples.len() - 1].0 != 1.0 {
        return Err(invalid("samples must include t = 0 and t = 1"));
    }
    if samples.iter().any(|s| !(s.1 > 0.0)) {
        return Err(invalid("j must be positive on the grid"));
    }
    let t: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.1.powf(1.0 / nprime)).collect();
    let (y0, y1) = (y[0], y[y.len() - 1]);
    let bound = -k * theta * theta;
    let hmax = t.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);

    let spec = serde_json::json!({ "theta": theta, "K": k, "Nprime": nprime, "samples": samples.len() });
    let mut report = CheckReport::new("distortion_concavity", spec, tolerance).with_discretization(hmax);
    let mut hypothesis = true;
    for i in 1..t.len() - 1 {
        let (_, d2) = derivatives(&t, &y, i);
        let value = nprime * d2 / y[i];
        let slack = tolerance + hmax * hmax * (1.0 + value.abs() + bound.abs() + (bound / nprime).powi(2));
        if value > bound + slack {
            hypothesis = false;
        }
        report.push(
            ReportEntry::new(Some(t[i]), Some(nprime), ExtReal::Finite(value), ExtReal::Finite(bound))
                .labeled("hypothesis"),
        );
    }
    let mut sigma_ok = true;
    let mut tau_ok = true;
    for i in 1..t.len() - 1 {
        let ti = t[i];
        for (label, a, b) in [
            ("sigma", sigma_kn(k, nprime, 1.0 - ti, theta), sigma_kn(k, nprime, ti, theta)),
            ("tau", tau_kn(k, nprime, 1.0 - ti, theta), tau_kn(k, nprime, ti, theta)),
        ] {
            let lhs = a * y0 + b * y1;
            let entry = ReportEntry::new(Some(ti), Some(nprime), lhs, ExtReal::Finite(y[i])).labeled(label);
            let holds = entry.margin >= ExtReal::Finite(-tolerance);
            if label == "sigma" {
                sigma_ok &= holds;
            } else {
                tau_ok &= holds;
            }
            report.push(entry);
        }
    }
    let mut report = report.finalize();
    report.notes.clear();
    report.quantity("hypothesis_holds", f64::from(u8::from(hypothesis)));
    report.quantity("tau_holds", f64::from(u8::from(tau_ok)));
    report.pass = !hypothesis || sigma_ok;
    if !hypothesis {
        report.note("differential hypothesis fails on the grid; the conclusion is not implied");
    } else if !sigma_ok {
        report.note("witness search exhausted: hypothesis holds but the sigma inequality fails");
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesics::dyadic_grid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn quad(lambda: f64) -> WeightedFlatModel {
        WeightedFlatModel::new(2, 3.0, Box::new(QuadraticField::lorentzian(lambda, 2))).unwrap()
    }

    #[test]
    fn ricci_examples() {
        let flat = WeightedFlatModel::flat(2, 2.0).unwrap();
        assert_eq!(bakry_emery_ricci(&flat, &[0.0, 0.0], &[1.0, 0.3]).unwrap(), 0.0);
        let m = quad(2.0);
        let xi = [1.0, 0.5];
        let want = 2.0 * minkowski_dot(&xi, &xi);
        assert_relative_eq!(bakry_emery_ricci(&m, &[0.0, 0.0], &xi).unwrap(), want, epsilon = 1e-14);
        assert!(bakry_emery_ricci(&m, &[0.0, 0.0], &[0.3, 1.0]).is_err());
        assert!(WeightedFlatModel::new(2, 2.0, Box::new(QuadraticField::lorentzian(1.0, 2))).is_err());
        let c = WeightedFlatModel::new(2, 2.0, Box::new(ConstantField { value: 3.0, dim: 2 })).unwrap();
        assert_eq!(bakry_emery_ricci(&c, &[1.0, 0.0], &xi).unwrap(), 0.0);
    }

    #[test]
    fn finite_differences_match_analytic() {
        let q = QuadraticField::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -2.0]),
            DVector::from_column_slice(&[0.3, -0.1]),
            1.0,
        )
        .unwrap();
        let qc = q.clone();
        let fd = FiniteDifferenceField::new(move |z: &[f64]| qc.value(z), 2, 1.0);
        let z = [0.4, -0.7];
        assert!((fd.gradient(&z) - q.gradient(&z)).amax() < 1e-7);
        assert!((fd.hessian(&z) - q.hessian(&z)).amax() < 1e-5);
        let m1 = WeightedFlatModel::new(2, 4.0, Box::new(q)).unwrap();
        let m2 = WeightedFlatModel::new(2, 4.0, Box::new(fd)).unwrap();
        let xi = [1.0, 0.2];
        let a = bakry_emery_ricci(&m1, &z, &xi).unwrap();
        let b = bakry_emery_ricci(&m2, &z, &xi).unwrap();
        assert!((a - b).abs() < 1e-5);
    }

    #[test]
    fn jacobian_examples() {
        let flat = WeightedFlatModel::flat(2, 2.0).unwrap();
        let grid = dyadic_grid(3);
        let dil = TransportField::linear(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        for r in jacobian_along_transport(&flat, &dil, &[1.0, 0.2], &grid).unwrap() {
            assert_relative_eq!(r.j, (1.0 + r.t).powi(2), epsilon = 1e-12);
        }
        let m = quad(1.0);
        let tr = TransportField::translation(DVector::from_column_slice(&[1.0, 0.0]));
        for r in jacobian_along_transport(&m, &tr, &[0.0, 0.0], &grid).unwrap() {
            assert_eq!(r.a, DMatrix::identity(2, 2));
            assert_relative_eq!(r.j, (0.5 * r.t * r.t).exp(), epsilon = 1e-12);
        }
        let caustic = TransportField::linear(DMatrix::from_diagonal_element(2, 2, -1.0), DVector::zeros(2)).unwrap();
        match jacobian_along_transport(&flat, &caustic, &[1.0, 0.0], &grid) {
            Err(Error::Singular(t)) => assert_eq!(t, 1.0),
            other => panic!("expected a caustic, got {other:?}"),
        }
    }

    #[test]
    fn riccati_examples() {
        let grid = dyadic_grid(3);
        for b in riccati_flat(&DMatrix::zeros(2, 2), &grid).unwrap() {
            assert_eq!(b, DMatrix::zeros(2, 2));
        }
        for (t, b) in grid.iter().zip(riccati_flat(&DMatrix::identity(2, 2), &grid).unwrap()) {
            assert!((b - DMatrix::identity(2, 2) / (1.0 + t)).amax() < 1e-15);
        }
        let nil = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        for b in riccati_flat(&nil, &grid).unwrap() {
            assert_eq!(b, nil);
        }
        assert!(riccati_flat(&DMatrix::from_diagonal_element(2, 2, -1.0), &grid).is_err());
    }

    #[test]
    fn translation_is_equality() {
        let samples: Vec<(f64, f64)> = dyadic_grid(4).into_iter().map(|t| (t, 1.0)).collect();
        let r = verify_distortion_concavity(&samples, 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert!(r.pass);
        assert_eq!(r.quantities["hypothesis_holds"], 1.0);
        assert!(r.labeled("sigma").all(|e| e.margin.to_f64().abs() < 1e-14));
    }

    #[test]
    fn sigma_equality_profile_is_tight() {
        let grid = dyadic_grid(5);
        for (k, np, th) in [(1.0, 2.0, 1.0), (-1.0, 3.0, 2.0), (0.0, 10.0, 0.5)] {
            let j = sigma_equality_profile(k, np, th, 0.7, 1.9, &grid).unwrap();
            let samples: Vec<(f64, f64)> = grid.iter().copied().zip(j).collect();
            let r = verify_distortion_concavity(&samples, th, k, np, 1e-8).unwrap();
            assert!(r.pass);
            assert_eq!(r.quantities["hypothesis_holds"], 1.0);
            assert!(r.labeled("sigma").all(|e| e.margin.to_f64().abs() <= 1e-8), "{:?}", r.entries);
        }
    }

    #[test]
    fn strict_forcing_gives_positive_margin() {
        // y = 1 + 0.3 sin(πt) is strictly concave with equal endpoints
        let (k, np, th) = (0.0, 2.0, 1.0);
        let grid = dyadic_grid(5);
        let samples: Vec<(f64, f64)> = grid.iter().map(|&t| (t, (1.0 + (std::f64::consts::PI * t).sin() * 0.3).powf(np))).collect();
        let r = verify_distortion_concavity(&samples, th, k, np, 1e-10).unwrap();
        assert!(r.pass);
        assert!(r.labeled("sigma").all(|e| e.margin.to_f64() > 0.0));
    }

    #[test]
    fn tau_comparison_matches_coefficients() {
        let grid = dyadic_grid(4);
        for k in [-1.0, 0.0, 1.0] {
            for np in [2.0, 3.0, 10.0] {
                for th in [0.5, 1.0, 2.0] {
                    let ode = tau_comparison_coefficients(k, np, th, &grid).unwrap();
                    for (&t, v) in grid.iter().zip(ode) {
                        assert!((v - tau_kn(k, np, t, th).to_f64()).abs() < 1e-8);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn ricci_is_quadratic(c in 0.1f64..5.0, a in 1.0f64..3.0, b in -0.9f64..0.9, lambda in -2.0f64..2.0) {
            let m = WeightedFlatModel::new(
                2,
                3.5,
                Box::new(QuadraticField::new(
                    DMatrix::from_row_slice(2, 2, &[lambda, 0.3, 0.3, 1.0]),
                    DVector::from_column_slice(&[0.2, -0.4]),
                    0.0,
                ).unwrap()),
            ).unwrap();
            let xi = [a, b * a];
            let scaled = [c * a, c * b * a];
            let x = [0.1, 0.2];
            let v1 = bakry_emery_ricci(&m, &x, &xi).unwrap();
            let v2 = bakry_emery_ricci(&m, &x, &scaled).unwrap();
            prop_assert!((v2 - c * c * v1).abs() <= 1e-12 * (1.0 + v2.abs()));
        }

        #[test]
        fn riccati_closed_form_matches_rk4(diag in proptest::collection::vec(0.0f64..1.0, 2), off in proptest::collection::vec(-0.3f64..0.3, 2)) {
            let b0 = DMatrix::from_row_slice(2, 2, &[diag[0], off[0], off[1], diag[1]]);
            let closed = riccati_flat(&b0, &[1.0]).unwrap();
            let num = integrate_riccati_rk4(&b0, 1.0, 2000);
            prop_assert!((&closed[0] - num).amax() < 1e-8);
        }
    }
}
