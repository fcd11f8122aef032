//! Discrete Lorentzian measured spaces: events, causal kernels and
//! cell-centered grid samplings of Minkowski space.

use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::report::{CheckReport, ReportEntry};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// Tolerance on `Δt − |Δx|` used to classify null separations.
pub const NULL_TOL: f64 = 1e-12;

/// A spacetime event; coordinate 0 is time.
#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub coords: SmallVec<[f64; 4]>,
}

impl Event {
    pub fn new(coords: &[f64]) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Event { coords: SmallVec::from_slice(coords) }
    }

    pub fn time(&self) -> f64 {
        self.coords[0]
    }

    pub fn spatial(&self) -> &[f64] {
        &self.coords[1..]
    }

    /// Number of spatial dimensions.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// `(1 − s)·self + s·other`.
    pub fn lerp(&self, other: &Event, s: f64) -> Event {
        if s == 0.0 {
            return self.clone();
        }
        if s == 1.0 {
            return other.clone();
        }
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (1.0 - s) * a + s * b)
            .collect();
        Event { coords }
    }

    pub fn max_abs_diff(&self, other: &Event) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<f64>> for Event {
    fn from(v: Vec<f64>) -> Self {
        Event { coords: SmallVec::from_vec(v) }
    }
}

impl Serialize for Event {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Event {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        if v.len() < 2 {
            return Err(serde::de::Error::custom("an event needs a time and at least one space coordinate"));
        }
        Ok(Event::from(v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Chronological,
    CausalNull,
    Unrelated,
}

/// Causal structure and time separation of a spacetime.
pub trait CausalKernel: Send + Sync {
    fn relation(&self, x: &Event, y: &Event) -> Relation;

    /// Time separation; zero unless `x ≪ y`.
    fn tau(&self, x: &Event, y: &Event) -> f64;

    fn is_causal(&self, x: &Event, y: &Event) -> bool {
        self.relation(x, y) != Relation::Unrelated
    }

    fn is_chronological(&self, x: &Event, y: &Event) -> bool {
        self.relation(x, y) == Relation::Chronological
    }

    /// Spatial dimension of the events this kernel accepts.
    fn dim(&self) -> usize;
}

/// Minkowski space ℝ^{1,n}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinkowskiKernel {
    n: usize,
}

pub fn minkowski_kernel(n: usize) -> MinkowskiKernel {
    assert!(n >= 1, "Minkowski space needs at least one spatial dimension");
    MinkowskiKernel { n }
}

impl MinkowskiKernel {
    fn split(&self, x: &Event, y: &Event) -> (f64, f64) {
        debug_assert_eq!(x.coords.len(), self.n + 1);
        let dt = y.coords[0] - x.coords[0];
        let r2: f64 = x.coords[1..]
            .iter()
            .zip(&y.coords[1..])
            .map(|(a, b)| (b - a) * (b - a))
            .sum();
        (dt, r2.sqrt())
    }
}

impl CausalKernel for MinkowskiKernel {
    fn relation(&self, x: &Event, y: &Event) -> Relation {
        let (dt, r) = self.split(x, y);
        let gap = dt - r;
        if gap > NULL_TOL {
            Relation::Chronological
        } else if gap >= -NULL_TOL && dt >= -NULL_TOL {
            Relation::CausalNull
        } else {
            Relation::Unrelated
        }
    }

    fn tau(&self, x: &Event, y: &Event) -> f64 {
        let (dt, r) = self.split(x, y);
        let gap = dt - r;
        if gap > NULL_TOL {
            (gap * (dt + r)).sqrt()
        } else {
            0.0
        }
    }

    fn dim(&self) -> usize {
        self.n
    }
}

/// The weight V of the reference measure e^V·vol.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Weight {
    #[default]
    Zero,
    /// `V(z) = c` for a constant `c`.
    Constant { value: f64 },
    /// `V(z) = ½ Σ_i a_i z_i²`, one coefficient per coordinate (time first).
    Quadratic { coeffs: Vec<f64> },
}

impl Weight {
    pub fn value(&self, z: &[f64]) -> f64 {
        match self {
            Weight::Zero => 0.0,
            Weight::Constant { value } => *value,
            Weight::Quadratic { coeffs } => {
                0.5 * coeffs.iter().zip(z).map(|(a, x)| a * x * x).sum::<f64>()
            }
        }
    }

    fn validate(&self, coords: usize) -> Result<()> {
        if let Weight::Quadratic { coeffs } = self {
            if coeffs.len() != coords {
                return Err(invalid(format!(
                    "quadratic weight needs {coords} coefficients, got {}",
                    coeffs.len()
                )));
            }
        }
        Ok(())
    }
}

/// JSON description of a grid space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub bounds: Vec<[f64; 2]>,
    pub resolution: Vec<usize>,
    #[serde(default)]
    pub weight: Weight,
}

impl SpaceConfig {
    pub fn build(&self) -> Result<SampledSpace> {
        build_grid_space(&self.bounds, &self.resolution, self.weight.clone())
    }
}

/// A cell-centered grid sampling of a box in ℝ^{1+n}.
///
/// Points are stored time-major: the index of cell `(i_0, …, i_n)` is
/// `((i_0·r_1 + i_1)·r_2 + …)`.
#[derive(Clone, Debug)]
pub struct SampledSpace {
    bounds: Vec<[f64; 2]>,
    resolution: Vec<usize>,
    widths: Vec<f64>,
    points: Vec<Event>,
    masses: Vec<f64>,
    cell_volume: f64,
    weight: Weight,
}

pub fn build_grid_space(bounds: &[[f64; 2]], resolution: &[usize], weight: Weight) -> Result<SampledSpace> {
    if bounds.len() < 2 {
        return Err(invalid("a space needs a time axis and at least one spatial axis"));
    }
    if bounds.len() != resolution.len() {
        return Err(invalid(format!(
            "{} bounds but {} resolution entries",
            bounds.len(),
            resolution.len()
        )));
    }
    for (k, (b, &r)) in bounds.iter().zip(resolution).enumerate() {
        if r == 0 {
            return Err(invalid(format!("resolution of axis {k} is zero")));
        }
        if !(b[1] > b[0]) || !b[0].is_finite() || !b[1].is_finite() {
            return Err(invalid(format!("axis {k} has a degenerate box [{}, {}]", b[0], b[1])));
        }
    }
    weight.validate(bounds.len())?;
    let widths: Vec<f64> = bounds
        .iter()
        .zip(resolution)
        .map(|(b, &r)| (b[1] - b[0]) / r as f64)
        .collect();
    let cell_volume: f64 = widths.iter().product();
    let total: usize = resolution.iter().product();
    let mut points = Vec::with_capacity(total);
    let mut masses = Vec::with_capacity(total);
    let mut idx = vec![0usize; bounds.len()];
    for _ in 0..total {
        let coords: SmallVec<[f64; 4]> = idx
            .iter()
            .enumerate()
            .map(|(k, &i)| bounds[k][0] + (i as f64 + 0.5) * widths[k])
            .collect();
        masses.push(cell_volume * weight.value(&coords).exp());
        points.push(Event { coords });
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < resolution[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(SampledSpace {
        bounds: bounds.to_vec(),
        resolution: resolution.to_vec(),
        widths,
        points,
        masses,
        cell_volume,
        weight,
    })
}

impl SampledSpace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Event] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Event {
        &self.points[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    pub fn cell_widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn bounds(&self) -> &[[f64; 2]] {
        &self.bounds
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    /// Spatial dimension n.
    pub fn dim(&self) -> usize {
        self.bounds.len() - 1
    }

    /// Euclidean diameter of one cell, the discretization scale `h`.
    pub fn cell_diameter(&self) -> f64 {
        self.widths.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn mass_of(&self, cells: &[usize]) -> f64 {
        cells.iter().map(|&i| self.masses[i]).sum()
    }

    fn axis_index(&self, k: usize, x: f64) -> Option<usize> {
        let [lo, hi] = self.bounds[k];
        let w = self.widths[k];
        let slack = 1e-9 * w;
        if x < lo - slack || x > hi + slack {
            return None;
        }
        let i = ((x - lo) / w + 1e-9).floor();
        Some((i.max(0.0) as usize).min(self.resolution[k] - 1))
    }

    /// Per-axis cell indices of the cell containing `x`.
    pub fn locate_multi(&self, x: &Event) -> Option<SmallVec<[usize; 4]>> {
        if x.coords.len() != self.bounds.len() {
            return None;
        }
        x.coords
            .iter()
            .enumerate()
            .map(|(k, &c)| self.axis_index(k, c))
            .collect()
    }

    /// Index of the cell containing `x`; cell faces belong to the upper cell.
    pub fn locate(&self, x: &Event) -> Option<usize> {
        self.locate_multi(x).map(|m| self.flatten(&m))
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.resolution)
            .fold(0, |acc, (&i, &r)| acc * r + i)
    }

    pub fn unflatten(&self, mut idx: usize) -> SmallVec<[usize; 4]> {
        let mut out: SmallVec<[usize; 4]> = SmallVec::from_elem(0, self.resolution.len());
        for k in (0..self.resolution.len()).rev() {
            out[k] = idx % self.resolution[k];
            idx /= self.resolution[k];
        }
        out
    }

    /// Cells sharing a face or corner with `idx` (excluding `idx`).
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let base = self.unflatten(idx);
        let d = base.len();
        let mut out = Vec::new();
        let combos = 3usize.pow(d as u32);
        'outer: for c in 0..combos {
            let mut m = base.clone();
            let mut code = c;
            let mut moved = false;
            for k in 0..d {
                let off = (code % 3) as isize - 1;
                code /= 3;
                let v = m[k] as isize + off;
                if v < 0 || v >= self.resolution[k] as isize {
                    continue 'outer;
                }
                moved |= off != 0;
                m[k] = v as usize;
            }
            if moved {
                out.push(self.flatten(&m));
            }
        }
        out
    }

    /// Indices of cells whose centers lie in the closed box `[lo, hi]`.
    pub fn cells_in_box(&self, lo: &[f64], hi: &[f64]) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| {
                self.points[i]
                    .coords
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(c, (a, b))| *c >= *a && *c <= *b)
            })
            .collect()
    }

    /// Whether `x` coincides with a sampled point (to 1e−12).
    pub fn sampled_index(&self, x: &Event) -> Option<usize> {
        self.locate(x)
            .filter(|&i| self.points[i].max_abs_diff(x) <= 1e-12)
    }
}

/// `I⁺(A)` within the window.
pub fn chronological_future(space: &SampledSpace, kernel: &dyn CausalKernel, a: &[usize]) -> Vec<usize> {
    (0..space.len())
        .filter(|&j| {
            let y = space.point(j);
            a.iter().any(|&i| kernel.is_chronological(space.point(i), y))
        })
        .collect()
}

/// `J⁺(x) ∩ J⁻(y)` among sampled points; empty unless `x ≤ y`.
pub fn causal_diamond(space: &SampledSpace, kernel: &dyn CausalKernel, x: &Event, y: &Event) -> Vec<usize> {
    if !kernel.is_causal(x, y) {
        return Vec::new();
    }
    (0..space.len())
        .filter(|&j| {
            let z = space.point(j);
            kernel.is_causal(x, z) && kernel.is_causal(z, y)
        })
        .collect()
}

/// The τ-ball `{y ∈ I⁺(x) : τ(x,y) < r} ∪ {x}` (or `≤ r` when `closed`).
pub fn tau_ball_with(
    space: &SampledSpace,
    kernel: &dyn CausalKernel,
    x: &Event,
    r: f64,
    closed: bool,
) -> Vec<usize> {
    let own = space.sampled_index(x);
    (0..space.len())
        .filter(|&j| {
            if Some(j) == own {
                return true;
            }
            let y = space.point(j);
            if !kernel.is_chronological(x, y) {
                return false;
            }
            let t = kernel.tau(x, y);
            if closed {
                t <= r
            } else {
                t < r
            }
        })
        .collect()
}

/// The open τ-ball `B^τ(x, r)`.
pub fn tau_ball(space: &SampledSpace, kernel: &dyn CausalKernel, x: &Event, r: f64) -> Result<Vec<usize>> {
    if !(r > 0.0) {
        return Err(invalid(format!("tau-ball radius must be positive, got {r}")));
    }
    Ok(tau_ball_with(space, kernel, x, r, false))
}

/// Reverse triangle inequality `τ(x,z) ≥ τ(x,y) + τ(y,z)` on causal chains.
pub fn check_reverse_triangle(kernel: &dyn CausalKernel, triples: &[(Event, Event, Event)]) -> Result<CheckReport> {
    let mut report = CheckReport::new(
        "reverse_triangle",
        serde_json::json!({"triples": triples.len()}),
        1e-12,
    );
    for (i, (x, y, z)) in triples.iter().enumerate() {
        if !kernel.is_causal(x, y) || !kernel.is_causal(y, z) {
            return Err(Error::NotCausalChain(i));
        }
        let lhs = kernel.tau(x, y) + kernel.tau(y, z);
        let rhs = kernel.tau(x, z);
        report.push(ReportEntry::new(None, None, ExtReal::Finite(lhs), ExtReal::Finite(rhs)));
    }
    Ok(report.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ev(c: &[f64]) -> Event {
        Event::new(c)
    }

    #[test]
    fn minkowski_examples() {
        let k = minkowski_kernel(1);
        let o = ev(&[0.0, 0.0]);
        assert_eq!(k.tau(&o, &ev(&[5.0, 3.0])), 4.0);
        assert_eq!(k.relation(&o, &ev(&[5.0, 3.0])), Relation::Chronological);
        assert_eq!(k.tau(&o, &ev(&[1.0, 1.0])), 0.0);
        assert_eq!(k.relation(&o, &ev(&[1.0, 1.0])), Relation::CausalNull);
        assert_eq!(k.relation(&o, &ev(&[0.0, 1.0])), Relation::Unrelated);
        assert_eq!(k.tau(&o, &ev(&[0.0, 1.0])), 0.0);
        assert_eq!(k.relation(&o, &o), Relation::CausalNull);
        assert_eq!(k.relation(&ev(&[1.0, 0.0]), &o), Relation::Unrelated);
        let k3 = minkowski_kernel(3);
        assert_relative_eq!(k3.tau(&ev(&[0.0; 4]), &ev(&[3.0, 1.0, 1.0, 1.0])), 6f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn grid_examples() {
        let s = build_grid_space(&[[0.0, 1.0], [0.0, 1.0]], &[2, 2], Weight::Zero).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.masses().iter().all(|&m| (m - 0.25).abs() < 1e-15));
        assert_eq!(s.point(1).coords.as_slice(), &[0.25, 0.75]);
        let s = build_grid_space(&[[0.0, 1.0], [0.0, 1.0]], &[1, 1], Weight::Constant { value: 2f64.ln() }).unwrap();
        assert_relative_eq!(s.mass(0), 2.0, epsilon = 1e-15);
        let s = build_grid_space(&[[0.0, 2.0], [0.0, 1.0]], &[2, 1], Weight::Zero).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.masses().iter().all(|&m| (m - 1.0).abs() < 1e-15));
        assert!(build_grid_space(&[[0.0, 1.0], [0.0, 1.0]], &[0, 1], Weight::Zero).is_err());
        assert!(build_grid_space(&[[0.0, 0.0], [0.0, 1.0]], &[1, 1], Weight::Zero).is_err());
    }

    #[test]
    fn total_mass_is_box_volume() {
        let s = build_grid_space(&[[-0.5, 7.5], [-1.0, 1.0], [0.0, 0.3]], &[17, 9, 5], Weight::Zero).unwrap();
        assert_relative_eq!(s.total_mass(), 8.0 * 2.0 * 0.3, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_weight_from_json() {
        let cfg: SpaceConfig = serde_json::from_str(
            r#"{"bounds": [[0,1],[0,1]], "resolution": [1,1], "weight": {"kind": "quadratic", "coeffs": [2, 0]}}"#,
        )
        .unwrap();
        let s = cfg.build().unwrap();
        assert_relative_eq!(s.mass(0), (0.25f64).exp(), epsilon = 1e-15);
        let bad: std::result::Result<SpaceConfig, _> =
            serde_json::from_str(r#"{"bounds": [[0,1],[0,1]], "resolution": [1,1], "extra": 1}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn locate_and_neighbors() {
        let s = build_grid_space(&[[0.0, 1.0], [0.0, 1.0]], &[4, 4], Weight::Zero).unwrap();
        for i in 0..s.len() {
            assert_eq!(s.locate(s.point(i)), Some(i));
        }
        assert_eq!(s.locate(&ev(&[1.0, 1.0])), Some(15));
        assert_eq!(s.locate(&ev(&[0.25, 0.0])), Some(4));
        assert_eq!(s.locate(&ev(&[1.1, 0.0])), None);
        assert_eq!(s.neighbors(0).len(), 3);
        assert_eq!(s.neighbors(5).len(), 8);
    }

    #[test]
    fn futures_diamonds_balls() {
        let k = minkowski_kernel(1);
        let s = build_grid_space(&[[-1.0, 1.0], [-1.0, 1.0]], &[8, 8], Weight::Zero).unwrap();
        let o = ev(&[0.0, 0.0]);
        let fut = chronological_future(&s, &k, &[]);
        assert!(fut.is_empty());
        let got = (0..s.len())
            .filter(|&j| k.is_chronological(&o, s.point(j)))
            .collect::<Vec<_>>();
        let want: Vec<usize> = (0..s.len())
            .filter(|&j| {
                let p = s.point(j);
                p.time() > p.spatial()[0].abs()
            })
            .collect();
        assert_eq!(got, want);

        let d = causal_diamond(&s, &k, &o, &ev(&[0.0, 1.0]));
        assert!(d.is_empty());
        let d = causal_diamond(&s, &k, &o, &ev(&[2.0, 0.0]));
        assert!(d.iter().all(|&j| {
            let p = s.point(j);
            p.time() >= p.spatial()[0].abs() && 2.0 - p.time() >= p.spatial()[0].abs()
        }));
        assert!(!d.is_empty());

        let grid = build_grid_space(&[[0.0, 2.0], [0.0, 2.0]], &[8, 8], Weight::Zero).unwrap();
        let ball = tau_ball(&grid, &k, &o, 1.0).unwrap();
        for j in 0..grid.len() {
            let p = grid.point(j);
            let (t, x) = (p.time(), p.spatial()[0]);
            assert_eq!(ball.contains(&j), t > x.abs() && t * t - x * x < 1.0);
        }
        let big = tau_ball(&grid, &k, &o, 100.0).unwrap();
        let future = chronological_future(&grid, &k, &[]).len();
        assert_eq!(future, 0);
        let n_future = (0..grid.len()).filter(|&j| k.is_chronological(&o, grid.point(j))).count();
        assert_eq!(big.len(), n_future);
        assert!(tau_ball(&grid, &k, &o, 0.0).is_err());
        // sampled center is included
        let c = grid.point(0).clone();
        assert!(tau_ball(&grid, &k, &c, 0.01).unwrap().contains(&0));
    }

    #[test]
    fn reverse_triangle_examples() {
        let k = minkowski_kernel(1);
        let r = check_reverse_triangle(&k, &[(ev(&[0.0, 0.0]), ev(&[1.0, 0.0]), ev(&[2.0, 0.0]))]).unwrap();
        assert!(r.pass);
        assert_relative_eq!(r.worst_margin.to_f64(), 0.0, epsilon = 1e-15);
        let r = check_reverse_triangle(&k, &[(ev(&[0.0, 0.0]), ev(&[1.0, 0.5]), ev(&[2.0, 0.0]))]).unwrap();
        assert_relative_eq!(r.worst_margin.to_f64(), 2.0 - 2.0 * 0.75f64.sqrt(), epsilon = 1e-15);
        let e = check_reverse_triangle(&k, &[(ev(&[0.0, 0.0]), ev(&[0.0, 1.0]), ev(&[2.0, 0.0]))]);
        assert!(matches!(e, Err(Error::NotCausalChain(0))));
    }

    #[test]
    fn push_up_on_small_grid() {
        let k = minkowski_kernel(1);
        let s = build_grid_space(&[[0.0, 2.0], [-1.0, 1.0]], &[5, 5], Weight::Zero).unwrap();
        let pts = s.points();
        for x in pts {
            for y in pts {
                for z in pts {
                    let a = k.is_chronological(x, y) && k.is_causal(y, z);
                    let b = k.is_causal(x, y) && k.is_chronological(y, z);
                    if a || b {
                        assert!(k.is_chronological(x, z));
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn reverse_triangle_random(
            t1 in 0.0f64..3.0, x1 in -1.0f64..1.0, t2 in 0.0f64..3.0, x2 in -1.0f64..1.0, y2 in -1.0f64..1.0, y1 in -1.0f64..1.0
        ) {
            let k = minkowski_kernel(2);
            let a = ev(&[0.0, 0.0, 0.0]);
            let b = ev(&[t1 + (x1 * x1 + y1 * y1).sqrt(), x1, y1]);
            let c = ev(&[b.time() + t2 + (x2 * x2 + y2 * y2).sqrt(), x1 + x2, y1 + y2]);
            prop_assert!(k.is_causal(&a, &b) && k.is_causal(&b, &c));
            prop_assert!(k.tau(&a, &c) >= k.tau(&a, &b) + k.tau(&b, &c) - 1e-12);
            prop_assert_eq!(k.tau(&a, &b) > 0.0, k.is_chronological(&a, &b));
        }
    }
}
