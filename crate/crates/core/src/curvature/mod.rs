//! Timelike curvature-dimension checkers and geometric inequalities.
//!
//! The conditions are existential: a failing report means the tested plan
//! is not a witness at the given discretization, not that the condition is
//! refuted.

mod good;
mod inequalities;
mod singular;
mod tcd;

pub use good::{good_geodesic_bisect, tmcp_good_geodesic, GoodGeodesic};
pub use inequalities::{
    bishop_gromov, bonnet_myers_bound, brunn_minkowski, check_bonnet_myers, scan_sup_tau, BishopGromovInput,
};
pub use singular::mutual_singularity_probe;
pub use tcd::{check_pathwise, check_tcd, check_tcd_plan, check_tmcp, midpoint_check};

use crate::coeffs::{sigma_kn, tau_kn};
use crate::error::{invalid, Result};
use crate::extreal::ExtReal;
use crate::geodesics::{default_grid, GeodesicOracle};
use crate::spacetime::{CausalKernel, SampledSpace};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[serde(alias = "TCD_reduced")]
    TcdReduced,
    #[serde(alias = "TCD_full")]
    TcdFull,
    #[serde(alias = "TCD_entropic")]
    TcdEntropic,
    #[serde(alias = "TMCP_reduced")]
    TmcpReduced,
    #[serde(alias = "TMCP_full")]
    TmcpFull,
    #[serde(alias = "TMCP_entropic")]
    TmcpEntropic,
    PathwiseReduced,
    PathwiseFull,
}

impl Variant {
    /// Whether the τ-coefficients (rather than σ) enter the inequality.
    pub fn uses_tau(self) -> bool {
        matches!(self, Variant::TcdFull | Variant::TmcpFull | Variant::PathwiseFull)
    }

    pub fn is_tmcp(self) -> bool {
        matches!(self, Variant::TmcpReduced | Variant::TmcpFull | Variant::TmcpEntropic)
    }

    pub fn is_entropic(self) -> bool {
        matches!(self, Variant::TcdEntropic | Variant::TmcpEntropic)
    }

    pub fn is_pathwise(self) -> bool {
        matches!(self, Variant::PathwiseReduced | Variant::PathwiseFull)
    }
}

/// The distortion coefficient at `(K, N', t, θ)`: τ when `full`, else σ.
pub fn coefficient(full: bool, k: f64, nprime: f64, t: f64, theta: f64) -> ExtReal {
    if full {
        tau_kn(k, nprime, t, theta)
    } else {
        sigma_kn(k, nprime, t, theta)
    }
}

fn is_dyadic(t: f64) -> bool {
    let scaled = t * (1u64 << 30) as f64;
    scaled == scaled.round()
}

/// Parameters of one curvature-dimension check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSpec {
    pub variant: Variant,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub p: f64,
    /// Empty in a config file means [`ConditionSpec::default_nprime_grid`].
    #[serde(rename = "Nprime_grid", default)]
    pub nprime_grid: Vec<f64>,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    /// Tolerance as a multiple of the cell diameter `h`.
    #[serde(default = "default_eps_scale")]
    pub eps_scale: f64,
    /// Absolute tolerance; overrides `eps_scale` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

fn default_eps_scale() -> f64 {
    1.0
}

fn default_t_grid() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 1.0]
}

impl ConditionSpec {
    /// Defaults: `N' ∈ {N, N+1, 2N, 10N}`, `t ∈ {0, 1/4, 1/2, 3/4, 1}`.
    pub fn new(variant: Variant, k: f64, n: f64, p: f64) -> Result<Self> {
        let spec = ConditionSpec {
            variant,
            k,
            n,
            p,
            nprime_grid: Self::default_nprime_grid(n),
            t_grid: default_t_grid(),
            eps_scale: 1.0,
            eps: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `{N, N+1, 2N, 10N}` without duplicates.
    pub fn default_nprime_grid(n: f64) -> Vec<f64> {
        let mut grid = vec![n, n + 1.0, 2.0 * n, 10.0 * n];
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }

    pub fn with_nprime_grid(mut self, grid: &[f64]) -> Result<Self> {
        self.nprime_grid = grid.to_vec();
        self.validate()?;
        Ok(self)
    }

    /// Sets the time grid; `0`, `1/2` and `1` are always included.
    pub fn with_t_grid(mut self, grid: &[f64]) -> Result<Self> {
        let mut g = grid.to_vec();
        g.extend([0.0, 0.5, 1.0]);
        g.sort_by(f64::total_cmp);
        g.dedup();
        self.t_grid = g;
        self.validate()?;
        Ok(self)
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.k.is_finite() {
            return Err(invalid("K must be finite"));
        }
        if !(self.n >= 1.0) {
            return Err(invalid(format!("N must be >= 1, got {}", self.n)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(invalid(format!("p must lie in (0,1), got {}", self.p)));
        }
        if self.nprime_grid.is_empty() || self.nprime_grid.iter().any(|&m| !(m >= self.n)) {
            return Err(invalid("every N' must satisfy N' >= N"));
        }
        if self.t_grid.iter().any(|&t| !(0.0..=1.0).contains(&t) || !is_dyadic(t)) {
            return Err(invalid("t_grid must contain dyadic times in [0,1]"));
        }
        Ok(())
    }

    /// Absolute tolerance at cell diameter `h`.
    pub fn tolerance(&self, h: f64) -> f64 {
        self.eps.unwrap_or(self.eps_scale * h)
    }
}

/// The geometric context shared by the checkers.
pub struct CheckContext<'a> {
    pub oracle: &'a dyn GeodesicOracle,
    pub space: &'a SampledSpace,
    /// Sample grid for plan curves.
    pub grid: Vec<f64>,
}

impl<'a> CheckContext<'a> {
    pub fn new(oracle: &'a dyn GeodesicOracle, space: &'a SampledSpace) -> Self {
        CheckContext { oracle, space, grid: default_grid() }
    }

    pub fn kernel(&self) -> &dyn CausalKernel {
        self.oracle.kernel()
    }
}
