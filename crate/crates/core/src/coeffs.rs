//! Distortion coefficients σ_{K,N}, τ_{K,N} and the auxiliary functions
//! G_t, H_t and the volume profile 𝔳_{K,N}.

use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::quadrature;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const PI2: f64 = PI * PI;
const FLAT_CUTOFF: f64 = 1e-14;

/// Parameters `(K, N, t, θ)` of a distortion coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffParams {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub t: f64,
    pub theta: f64,
}

impl CoeffParams {
    pub fn new(k: f64, n: f64, t: f64, theta: f64) -> Result<Self> {
        let p = CoeffParams { k, n, t, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.k.is_finite() {
            return Err(invalid(format!("K must be finite, got {}", self.k)));
        }
        if !(self.n >= 1.0) || !self.n.is_finite() {
            return Err(invalid(format!("N must be a finite number >= 1, got {}", self.n)));
        }
        if !(0.0..=1.0).contains(&self.t) {
            return Err(invalid(format!("t must lie in [0,1], got {}", self.t)));
        }
        if !(self.theta >= 0.0) || !self.theta.is_finite() {
            return Err(invalid(format!("theta must be finite and >= 0, got {}", self.theta)));
        }
        Ok(())
    }
}

/// The generalized sine 𝔰_κ(θ).
pub fn s_kappa(kappa: f64, theta: f64) -> f64 {
    if kappa > 0.0 {
        let r = kappa.sqrt();
        (r * theta).sin() / r
    } else if kappa < 0.0 {
        let r = (-kappa).sqrt();
        (r * theta).sinh() / r
    } else {
        theta
    }
}

/// `sinh(t a) / sinh(a)` for `a > 0`, stable for large `a`.
fn sinh_ratio(t: f64, a: f64) -> f64 {
    if a < 20.0 {
        (t * a).sinh() / a.sinh()
    } else {
        let num = -(-2.0 * t * a).exp_m1();
        let den = -(-2.0 * a).exp_m1();
        ((t - 1.0) * a).exp() * num / den
    }
}

/// σ_κ^{(t)}(θ).
pub fn sigma_kappa(kappa: f64, t: f64, theta: f64) -> ExtReal {
    let kt2 = kappa * theta * theta;
    if kt2 >= PI2 {
        return ExtReal::PosInf;
    }
    if kt2.abs() < FLAT_CUTOFF {
        return ExtReal::Finite(t);
    }
    if t == 0.0 {
        return ExtReal::ZERO;
    }
    if t == 1.0 {
        return ExtReal::Finite(1.0);
    }
    let a = kt2.abs().sqrt();
    let v = if kt2 > 0.0 {
        (t * a).sin() / a.sin()
    } else {
        sinh_ratio(t, a)
    };
    ExtReal::Finite(v)
}

/// σ_{K,N}^{(t)}(θ) = σ_{K/N}^{(t)}(θ).
pub fn sigma(p: &CoeffParams) -> ExtReal {
    sigma_kappa(p.k / p.n, p.t, p.theta)
}

/// τ_{K,N}^{(t)}(θ) = t^{1/N} σ_{K,N−1}^{(t)}(θ)^{1−1/N}, with τ_{K,1} := t.
pub fn tau_coeff(p: &CoeffParams) -> ExtReal {
    if p.n == 1.0 {
        return ExtReal::Finite(p.t);
    }
    let kappa = p.k / (p.n - 1.0);
    if (kappa * p.theta * p.theta).abs() < FLAT_CUTOFF {
        return ExtReal::Finite(p.t);
    }
    match sigma_kappa(kappa, p.t, p.theta) {
        ExtReal::Finite(v) => ExtReal::Finite(p.t.powf(1.0 / p.n) * v.powf(1.0 - 1.0 / p.n)),
        ExtReal::PosInf if p.t == 0.0 => ExtReal::ZERO,
        other => other,
    }
}

/// Convenience wrapper: σ_{K,N}^{(t)}(θ) without building `CoeffParams`.
pub fn sigma_kn(k: f64, n: f64, t: f64, theta: f64) -> ExtReal {
    sigma_kappa(k / n, t, theta)
}

/// Convenience wrapper: τ_{K,N}^{(t)}(θ).
pub fn tau_kn(k: f64, n: f64, t: f64, theta: f64) -> ExtReal {
    tau_coeff(&CoeffParams { k, n, t, theta })
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa >= PI2 || !kappa.is_finite() {
        return Err(Error::Domain(format!("kappa = {kappa} must be below pi^2")));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("t must lie in [0,1], got {t}")));
    }
    Ok(())
}

/// G_t(x, y, κ) = log[σ_κ^{(1−t)}(1) eˣ + σ_κ^{(t)}(1) eʸ].
pub fn g_t(x: f64, y: f64, kappa: f64, t: f64) -> Result<ExtReal> {
    check_kappa(kappa)?;
    check_t(t)?;
    let a = sigma_kappa(kappa, 1.0 - t, 1.0).to_f64();
    let b = sigma_kappa(kappa, t, 1.0).to_f64();
    let terms = [(a, x), (b, y)];
    let m = terms
        .iter()
        .filter(|(c, _)| *c > 0.0)
        .map(|(c, v)| c.ln() + v)
        .fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Ok(ExtReal::NegInf);
    }
    let s: f64 = terms
        .iter()
        .filter(|(c, _)| *c > 0.0)
        .map(|(c, v)| (c.ln() + v - m).exp())
        .sum();
    Ok(ExtReal::from_f64(m + s.ln()))
}

/// H_t(x, κ) = log σ_κ^{(1−t)}(1) + x. Equals `-inf` at `t = 1`.
pub fn h_t(x: f64, kappa: f64, t: f64) -> Result<ExtReal> {
    check_kappa(kappa)?;
    check_t(t)?;
    let a = sigma_kappa(kappa, 1.0 - t, 1.0).to_f64();
    Ok(ExtReal::from_f64(a.ln() + x))
}

/// The volume profile 𝔳_{K,N}(r) = [∫₀^r 𝔰_{K/(N−1)}(s)^{N−1} ds]^{1/N}.
pub fn vol_profile(k: f64, n: f64, r: f64) -> Result<f64> {
    if !(n > 1.0) || !n.is_finite() {
        return Err(invalid(format!("vol_profile needs N > 1, got {n}")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(invalid(format!("radius must be finite and >= 0, got {r}")));
    }
    let kappa = k / (n - 1.0);
    if kappa > 0.0 && kappa * r * r >= PI2 {
        return Err(Error::Domain(format!(
            "radius {r} exceeds the diameter bound for K = {k}, N = {n}"
        )));
    }
    let e = n - 1.0;
    let integral = quadrature::integrate(|s| s_kappa(kappa, s).max(0.0).powf(e), 0.0, r, 1e-13);
    Ok(integral.powf(1.0 / n))
}

/// The Bishop–Gromov area profile 𝔰_{K,M}(r)^M, i.e. 𝔰_{K/M}(r)^M.
pub fn area_profile(k: f64, m: f64, r: f64) -> f64 {
    s_kappa(k / m, r).max(0.0).powf(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fin(x: ExtReal) -> f64 {
        x.finite().expect("finite coefficient")
    }

    #[test]
    fn s_kappa_branches() {
        assert_eq!(s_kappa(0.0, 2.5), 2.5);
        assert_relative_eq!(s_kappa(PI2, 0.5), 1.0 / PI, epsilon = 1e-15);
        assert_relative_eq!(s_kappa(-1.0, 1.0), 1.175_201_193_643_801_4, epsilon = 1e-14);
        // continuity at kappa = 0
        assert_relative_eq!(s_kappa(1e-12, 0.7), 0.7, epsilon = 1e-12);
        assert_relative_eq!(s_kappa(-1e-12, 0.7), 0.7, epsilon = 1e-12);
    }

    #[test]
    fn sigma_examples() {
        let p = CoeffParams::new(0.0, 3.0, 0.3, 7.0).unwrap();
        assert_eq!(sigma(&p), ExtReal::Finite(0.3));
        let p = CoeffParams::new(10.0, 1.0, 0.5, 1.0).unwrap();
        assert_eq!(sigma(&p), ExtReal::PosInf);
        let p = CoeffParams::new(-2.0, 2.0, 0.5, 2.0).unwrap();
        let want = 1f64.sinh() / 2f64.sinh();
        assert_relative_eq!(fin(sigma(&p)), want, epsilon = 1e-15);
        assert_relative_eq!(want, 0.324_027, epsilon = 1e-6);
        // boundary kappa theta^2 = pi^2 is infinite
        assert_eq!(sigma_kappa(PI2, 0.5, 1.0), ExtReal::PosInf);
    }

    #[test]
    fn tau_examples() {
        let p = CoeffParams::new(0.0, 4.0, 0.25, 3.0).unwrap();
        assert_relative_eq!(fin(tau_coeff(&p)), 0.25, epsilon = 1e-15);
        let p = CoeffParams::new(-2.0, 2.0, 0.5, 2.0).unwrap();
        // sigma_{K,N-1} with K/(N-1) = -2, so the sinh arguments are sqrt(2) and 2 sqrt(2)
        let r2 = 2f64.sqrt();
        let want = (0.5 * r2.sinh() / (2.0 * r2).sinh()).sqrt();
        assert_relative_eq!(fin(tau_coeff(&p)), want, epsilon = 1e-15);
        assert_relative_eq!(want, 0.338_784, epsilon = 1e-6);
        let p = CoeffParams::new(5.0, 1.0, 0.7, 0.1).unwrap();
        assert_eq!(tau_coeff(&p), ExtReal::Finite(0.7));
    }

    #[test]
    fn params_rejected() {
        assert!(CoeffParams::new(0.0, 0.5, 0.5, 1.0).is_err());
        assert!(CoeffParams::new(0.0, 2.0, 1.5, 1.0).is_err());
        assert!(CoeffParams::new(0.0, 2.0, 0.5, -1.0).is_err());
    }

    #[test]
    fn g_and_h_examples() {
        assert_relative_eq!(fin(g_t(0.0, 0.0, 0.0, 0.5).unwrap()), 0.0, epsilon = 1e-15);
        let l2 = 2f64.ln();
        assert_relative_eq!(fin(g_t(l2, l2, 0.0, 0.25).unwrap()), l2, epsilon = 1e-15);
        let s = 0.5f64.sin() / 1f64.sin();
        let want = (s * (1f64.exp() + 1.0)).ln();
        assert_relative_eq!(fin(g_t(1.0, 0.0, 1.0, 0.5).unwrap()), want, epsilon = 1e-14);
        assert!(g_t(0.0, 0.0, PI2, 0.5).is_err());

        assert_relative_eq!(fin(h_t(0.0, 0.0, 0.3).unwrap()), 0.7f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(fin(h_t(2.0, 0.0, 0.0).unwrap()), 2.0, epsilon = 1e-15);
        let want = (1f64.sinh() / 2f64.sinh()).ln();
        assert_relative_eq!(fin(h_t(0.0, -4.0, 0.5).unwrap()), want, epsilon = 1e-14);
        assert!(h_t(0.0, 10.0, 0.5).is_err());
        assert_eq!(h_t(0.0, 1.0, 1.0).unwrap(), ExtReal::NegInf);
    }

    #[test]
    fn vol_profile_examples() {
        assert_relative_eq!(vol_profile(0.0, 2.0, 3.0).unwrap(), 4.5f64.sqrt(), max_relative = 1e-12);
        for &(n, r) in &[(2.5, 1.3), (4.0, 0.2), (7.0, 3.0)] {
            let want = (f64::powf(r, n) / n).powf(1.0 / n);
            assert_relative_eq!(vol_profile(0.0, n, r).unwrap(), want, max_relative = 1e-11);
        }
        // 2 sinh^2(s/sqrt 2) = cosh(sqrt2 s) - 1 integrates to sinh(sqrt2 r)/sqrt2 - r
        let r2 = 2f64.sqrt();
        let antideriv = r2.sinh() / r2 - 1.0;
        assert_relative_eq!(
            vol_profile(-1.0, 3.0, 1.0).unwrap(),
            antideriv.powf(1.0 / 3.0),
            max_relative = 1e-11
        );
        // K > 0: s = sin s for K = 1, N = 2; integral 1 - cos r
        assert_relative_eq!(
            vol_profile(1.0, 2.0, 2.0).unwrap(),
            (1.0 - 2f64.cos()).sqrt(),
            max_relative = 1e-11
        );
        assert!(vol_profile(1.0, 2.0, 4.0).is_err());
        assert!(vol_profile(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn near_pole_accuracy() {
        // against an independent evaluation via sin(pi - x) near the pole
        for &gap in &[1e-6, 1e-4, 1e-2] {
            let kt2: f64 = PI2 - gap;
            let a = kt2.sqrt();
            for &t in &[0.1, 0.5, 0.9] {
                let want = (t * a).sin() / (PI - a).sin();
                let got = fin(sigma_kappa(kt2, t, 1.0));
                assert_relative_eq!(got, want, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn large_negative_curvature_is_stable() {
        let v = fin(sigma_kappa(-1e6, 0.5, 1.0));
        let want = (-500.0f64).exp();
        assert_relative_eq!(v, want, max_relative = 1e-10);
        assert!(fin(sigma_kappa(-1e8, 0.5, 1.0)) >= 0.0);
    }

    proptest! {
        #[test]
        fn scaling_identity(kappa in -50.0f64..50.0, theta in 0.01f64..3.0, t in 0.0f64..=1.0) {
            prop_assume!(kappa * theta * theta < PI2);
            let a = sigma_kappa(kappa, t, theta);
            let b = sigma_kappa(kappa * theta * theta, t, 1.0);
            match (a, b) {
                (ExtReal::Finite(x), ExtReal::Finite(y)) => prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs())),
                _ => prop_assert_eq!(a, b),
            }
        }

        #[test]
        fn lower_bound(k in -30.0f64..30.0, n in 1.0f64..20.0, t in 0.0f64..=1.0, theta in 0.0f64..5.0) {
            if let ExtReal::Finite(s) = sigma_kn(k, n, t, theta) {
                let km = (-k).max(0.0);
                let lb = t * (-(1.0 - t) * theta * (km / n).sqrt()).exp();
                prop_assert!(s >= lb - 1e-12 * (1.0 + lb));
            }
        }

        #[test]
        fn tau_dominates_sigma(k in -30.0f64..30.0, n in 1.0f64..20.0, t in 0.0f64..=1.0, theta in 0.0f64..3.0) {
            // with tau_{K,1} := t the ordering only survives for K <= 0 at N = 1
            prop_assume!(n > 1.0 || k <= 0.0);
            let s = sigma_kn(k, n, t, theta);
            let tau = tau_kn(k, n, t, theta);
            prop_assert!(tau >= s - ExtReal::Finite(1e-12));
        }

        #[test]
        fn tau_of_kstar_below_sigma(k in 0.01f64..30.0, n in 1.0f64..20.0, t in 0.0f64..=1.0, theta in 0.0f64..3.0) {
            let kstar = k * (n - 1.0) / n;
            let s = sigma_kn(k, n, t, theta);
            let tau = tau_kn(kstar, n, t, theta);
            if let (ExtReal::Finite(a), ExtReal::Finite(b)) = (tau, s) {
                prop_assert!(a <= b + 1e-12 * (1.0 + b));
            } else {
                prop_assert!(tau <= s);
            }
        }

        #[test]
        fn monotone_in_k_and_n(k in -20.0f64..20.0, dk in 0.0f64..5.0, n in 1.0f64..10.0, dn in 0.0f64..5.0,
                               t in 0.01f64..0.99, theta in 0.01f64..2.0) {
            let base = sigma_kn(k, n, t, theta);
            let up_k = sigma_kn(k + dk, n, t, theta);
            let up_n = sigma_kn(k, n + dn, t, theta);
            let tol = ExtReal::Finite(1e-12);
            prop_assert!(up_k + tol >= base);
            // sigma_{K/N} moves toward the flat value t as N grows
            if k >= 0.0 {
                prop_assert!(up_n <= base + tol);
            } else {
                prop_assert!(up_n + tol >= base);
            }
        }

        #[test]
        fn endpoints(k in -20.0f64..20.0, n in 1.0f64..10.0, theta in 0.0f64..2.0) {
            if sigma_kn(k, n, 0.5, theta).is_finite() {
                prop_assert_eq!(sigma_kn(k, n, 0.0, theta), ExtReal::ZERO);
                prop_assert_eq!(sigma_kn(k, n, 1.0, theta), ExtReal::Finite(1.0));
            }
        }

        #[test]
        fn g_jointly_convex(x1 in -5.0f64..5.0, y1 in -5.0f64..5.0, k1 in -20.0f64..9.0,
                            x2 in -5.0f64..5.0, y2 in -5.0f64..5.0, k2 in -20.0f64..9.0,
                            t in 0.0f64..=1.0, lam in 0.0f64..=1.0) {
            let g = |x: f64, y: f64, k: f64| fin(g_t(x, y, k, t).unwrap());
            let mid = g(lam * x1 + (1.0 - lam) * x2, lam * y1 + (1.0 - lam) * y2, lam * k1 + (1.0 - lam) * k2);
            let comb = lam * g(x1, y1, k1) + (1.0 - lam) * g(x2, y2, k2);
            prop_assert!(mid <= comb + 1e-10);
        }

        #[test]
        fn h_jointly_convex(x1 in -5.0f64..5.0, k1 in -20.0f64..9.0, x2 in -5.0f64..5.0, k2 in -20.0f64..9.0,
                            t in 0.0f64..0.999, lam in 0.0f64..=1.0) {
            let h = |x: f64, k: f64| fin(h_t(x, k, t).unwrap());
            let mid = h(lam * x1 + (1.0 - lam) * x2, lam * k1 + (1.0 - lam) * k2);
            let comb = lam * h(x1, k1) + (1.0 - lam) * h(x2, k2);
            prop_assert!(mid <= comb + 1e-10);
        }
    }
}
