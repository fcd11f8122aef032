//! Command-line front end and the JSON experiment runner.
//!
//! Exit codes: 0 when every check passes, 2 when a check fails, 1 on usage
//! or configuration errors.

use crate::coeffs::{sigma_kn, tau_kn};
use crate::curvature::{
    bishop_gromov, brunn_minkowski, check_bonnet_myers, check_tcd, check_tmcp, good_geodesic_bisect, midpoint_check,
    mutual_singularity_probe, tmcp_good_geodesic, BishopGromovInput, CheckContext, ConditionSpec,
};
use crate::error::{Error, Result};
use crate::geodesics::{build_plan, dyadic_grid, minkowski_oracle};
use crate::report::{CheckReport, ReportEntry};
use crate::smoothlab::{
    integrate_riccati_rk4, jacobian_along_transport, riccati_flat, sigma_equality_profile, tau_comparison_coefficients,
    verify_distortion_concavity, TransportField, WeightedFlatModel,
};
use crate::spacetime::{build_grid_space, causal_diamond, minkowski_kernel, Event, SampledSpace, SpaceConfig, Weight};
use crate::transport::{solve_lp_optimal, AtomSpec, DiscreteMeasure, TransportProblem};
use crate::ExtReal;
use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lorot", version, about = "Synthetic timelike curvature checks on sampled spacetimes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a distortion coefficient.
    Coeffs(CoeffsArgs),
    /// Solve an ℓ_p transport problem given as JSON.
    Transport(TransportArgs),
    /// Run the TCD checks of a config.
    CheckTcd(ConfigArgs),
    /// Run the TMCP checks of a config.
    CheckTmcp(ConfigArgs),
    /// Brunn–Minkowski for two timelike separated squares.
    BrunnMinkowski(BmArgs),
    /// Bishop–Gromov in a flat causal diamond.
    BishopGromov(BgArgs),
    /// Run the good-geodesic checks of a config.
    GoodGeodesic(ConfigArgs),
    /// Smooth-model verification suite.
    SmoothVerify(SmoothArgs),
    /// Run the midpoint checks of a config.
    Midpoint(ConfigArgs),
    /// Run every check of a config.
    Run(ConfigArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum CoeffKind {
    Sigma,
    Tau,
}

#[derive(Debug, Args)]
struct CoeffsArgs {
    #[arg(long = "K", allow_hyphen_values = true)]
    k: f64,
    #[arg(long = "N")]
    n: f64,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    theta: f64,
    #[arg(long, value_enum, default_value = "sigma")]
    kind: CoeffKind,
}

#[derive(Debug, Args)]
struct TransportArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct BmArgs {
    #[arg(long, default_value_t = 1.0)]
    side0: f64,
    #[arg(long, default_value_t = 1.0)]
    side1: f64,
    /// Time separation of the square centers.
    #[arg(long, default_value_t = 4.0)]
    sep: f64,
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    #[arg(long = "K", default_value_t = 0.0, allow_hyphen_values = true)]
    k: f64,
    #[arg(long = "Nprime", value_delimiter = ',', default_values_t = [2.0, 4.0])]
    nprime: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    #[arg(long, default_value_t = 0.02)]
    eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BgArgs {
    #[arg(long = "T", default_value_t = 4.0)]
    big_t: f64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long = "R", default_value_t = 2.0)]
    big_r: f64,
    #[arg(long = "K", default_value_t = 0.0, allow_hyphen_values = true)]
    k: f64,
    #[arg(long = "N", default_value_t = 2.0)]
    n: f64,
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    /// Shell width; defaults to four cells.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0.02)]
    eps: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SmoothArgs {
    #[arg(long = "K", default_value_t = 0.0, allow_hyphen_values = true)]
    k: f64,
    #[arg(long = "Nprime", default_value_t = 2.0)]
    nprime: f64,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    /// Dimension of the flat model used for random dilations.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A measure referenced by name from checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Uniform on the cells whose centers lie in `[lo, hi]`.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default = "one")]
        subsample: usize,
    },
    Dirac { at: Event },
    /// Explicit atoms, treated as a singular measure.
    Atoms { atoms: Vec<AtomSpec> },
}

fn one() -> usize {
    1
}

impl MeasureSpec {
    pub fn build(&self, space: &SampledSpace) -> Result<DiscreteMeasure> {
        match self {
            MeasureSpec::Box { lo, hi, subsample } => DiscreteMeasure::uniform_on_box(space, lo, hi, *subsample),
            MeasureSpec::Dirac { at } => Ok(DiscreteMeasure::dirac(at.clone())),
            MeasureSpec::Atoms { atoms } => DiscreteMeasure::new(
                atoms.iter().map(|a| a.at.clone()).collect(),
                atoms.iter().map(|a| a.weight).collect(),
                false,
            ),
        }
    }
}

/// A set of cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Sampled points of `J⁺(from) ∩ J⁻(to)`.
    Diamond { from: Event, to: Event },
}

impl SetSpec {
    pub fn cells(&self, space: &SampledSpace) -> Vec<usize> {
        match self {
            SetSpec::Box { lo, hi } => space.cells_in_box(lo, hi),
            SetSpec::Diamond { from, to } => causal_diamond(space, &minkowski_kernel(space.dim()), from, to),
        }
    }
}

fn default_eps() -> f64 {
    0.05
}

/// One check of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    Tcd {
        name: String,
        mu0: String,
        mu1: String,
        condition: ConditionSpec,
    },
    Tmcp {
        name: String,
        mu0: String,
        x1: Event,
        condition: ConditionSpec,
    },
    Midpoint {
        name: String,
        mu0: String,
        mu1: String,
        p: f64,
        #[serde(rename = "K")]
        k: f64,
        #[serde(rename = "Nprime_grid")]
        nprime_grid: Vec<f64>,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    BrunnMinkowski {
        name: String,
        a0: SetSpec,
        a1: SetSpec,
        t: f64,
        #[serde(rename = "K")]
        k: f64,
        #[serde(rename = "Nprime_grid")]
        nprime_grid: Vec<f64>,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    BonnetMyers {
        name: String,
        #[serde(rename = "K")]
        k: f64,
        #[serde(rename = "N")]
        n: f64,
    },
    BishopGromov {
        name: String,
        x: Event,
        set: SetSpec,
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
        #[serde(rename = "K")]
        k: f64,
        #[serde(rename = "N")]
        n: f64,
        delta: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    GoodGeodesic {
        name: String,
        mu0: String,
        mu1: String,
        p: f64,
        #[serde(rename = "K")]
        k: f64,
        #[serde(rename = "N")]
        n: f64,
        depth: u32,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    TmcpGoodGeodesic {
        name: String,
        mu0: String,
        x1: Event,
        p: f64,
        #[serde(rename = "K")]
        k: f64,
        #[serde(rename = "N")]
        n: f64,
        depth: u32,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    MutualSingularity {
        name: String,
        /// `[source, target]` measure names, one plan each.
        plans: Vec<[String; 2]>,
        p: f64,
        t_grid: Vec<f64>,
    },
}

impl CheckSpec {
    pub fn name(&self) -> &str {
        match self {
            CheckSpec::Tcd { name, .. }
            | CheckSpec::Tmcp { name, .. }
            | CheckSpec::Midpoint { name, .. }
            | CheckSpec::BrunnMinkowski { name, .. }
            | CheckSpec::BonnetMyers { name, .. }
            | CheckSpec::BishopGromov { name, .. }
            | CheckSpec::GoodGeodesic { name, .. }
            | CheckSpec::TmcpGoodGeodesic { name, .. }
            | CheckSpec::MutualSingularity { name, .. } => name,
        }
    }

    fn kind(&self) -> CheckKind {
        match self {
            CheckSpec::Tcd { .. } => CheckKind::Tcd,
            CheckSpec::Tmcp { .. } => CheckKind::Tmcp,
            CheckSpec::Midpoint { .. } => CheckKind::Midpoint,
            CheckSpec::GoodGeodesic { .. } | CheckSpec::TmcpGoodGeodesic { .. } => CheckKind::Good,
            _ => CheckKind::Other,
        }
    }

    fn measure_refs(&self) -> Vec<&str> {
        match self {
            CheckSpec::Tcd { mu0, mu1, .. }
            | CheckSpec::Midpoint { mu0, mu1, .. }
            | CheckSpec::GoodGeodesic { mu0, mu1, .. } => vec![mu0, mu1],
            CheckSpec::Tmcp { mu0, .. } | CheckSpec::TmcpGoodGeodesic { mu0, .. } => vec![mu0],
            CheckSpec::MutualSingularity { plans, .. } => plans.iter().flat_map(|p| [&*p[0], &*p[1]]).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CheckKind {
    Tcd,
    Tmcp,
    Midpoint,
    Good,
    Other,
}

/// Top-level experiment file (`"schema": 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub space: SpaceConfig,
    #[serde(default)]
    pub measures: BTreeMap<String, MeasureSpec>,
    pub checks: Vec<CheckSpec>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("lorot-out")
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: ExperimentConfig = serde_json::from_str(text)?;
        for check in &mut cfg.checks {
            if let CheckSpec::Tcd { condition, .. } | CheckSpec::Tmcp { condition, .. } = check {
                if condition.nprime_grid.is_empty() {
                    condition.nprime_grid = ConditionSpec::default_nprime_grid(condition.n);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::Config(format!("{}: {j}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(Error::Config(format!("unsupported schema version {}", self.schema)));
        }
        let mut names = std::collections::BTreeSet::new();
        for (i, c) in self.checks.iter().enumerate() {
            if !names.insert(c.name()) {
                return Err(Error::Config(format!("checks[{i}]: duplicate name '{}'", c.name())));
            }
            for m in c.measure_refs() {
                if !self.measures.contains_key(m) {
                    return Err(Error::Config(format!("checks[{i}] ('{}'): unknown measure '{m}'", c.name())));
                }
            }
            if let CheckSpec::Tcd { condition, .. } | CheckSpec::Tmcp { condition, .. } = c {
                condition
                    .validate()
                    .map_err(|e| Error::Config(format!("checks[{i}] ('{}'): {e}", c.name())))?;
            }
        }
        Ok(())
    }
}

/// Outcome of one executed check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub report: PathBuf,
    pub table: PathBuf,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub pass: bool,
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes `<name>.report.json` and `<name>.csv` into `dir`.
pub fn write_report(dir: &Path, name: &str, report: &CheckReport) -> Result<(PathBuf, PathBuf)> {
    let json = dir.join(format!("{name}.report.json"));
    let csv = dir.join(format!("{name}.csv"));
    write_atomic(&json, serde_json::to_string_pretty(report)?.as_bytes())?;
    write_atomic(&csv, report.to_csv().as_bytes())?;
    Ok((json, csv))
}

fn run_check(check: &CheckSpec, measures: &BTreeMap<String, DiscreteMeasure>, ctx: &CheckContext) -> Result<CheckReport> {
    let space = ctx.space;
    let m = |name: &str| &measures[name];
    match check {
        CheckSpec::Tcd { mu0, mu1, condition, .. } => check_tcd(m(mu0), m(mu1), condition, ctx),
        CheckSpec::Tmcp { mu0, x1, condition, .. } => check_tmcp(m(mu0), x1, condition, ctx),
        CheckSpec::Midpoint { mu0, mu1, p, k, nprime_grid, eps, .. } => {
            midpoint_check(m(mu0), m(mu1), *p, *k, nprime_grid, *eps, ctx)
        }
        CheckSpec::BrunnMinkowski { a0, a1, t, k, nprime_grid, eps, .. } => {
            brunn_minkowski(&a0.cells(space), &a1.cells(space), *t, *k, nprime_grid, *eps, ctx)
        }
        CheckSpec::BonnetMyers { k, n, .. } => check_bonnet_myers(space, ctx.kernel(), *k, *n),
        CheckSpec::BishopGromov { x, set, r, big_r, k, n, delta, eps, .. } => {
            let cells = set.cells(space);
            let input = BishopGromovInput {
                x: x.clone(),
                set: &cells,
                r: *r,
                big_r: *big_r,
                k: *k,
                n: *n,
                delta: *delta,
                eps: *eps,
            };
            bishop_gromov(&input, ctx)
        }
        CheckSpec::GoodGeodesic { mu0, mu1, p, k, n, depth, eps, .. } => {
            Ok(good_geodesic_bisect(m(mu0), m(mu1), *p, *k, *n, *depth, *eps, ctx)?.report)
        }
        CheckSpec::TmcpGoodGeodesic { mu0, x1, p, k, n, depth, eps, .. } => {
            Ok(tmcp_good_geodesic(m(mu0), x1, *p, *k, *n, *depth, *eps, ctx)?.report)
        }
        CheckSpec::MutualSingularity { plans, p, t_grid, .. } => {
            let built = plans
                .iter()
                .map(|[a, b]| {
                    let result = solve_lp_optimal(m(a), m(b), *p, ctx.kernel())?;
                    build_plan(m(a), m(b), &result, ctx.oracle, &ctx.grid)
                })
                .collect::<Result<Vec<_>>>()?;
            mutual_singularity_probe(&built, t_grid, space)
        }
    }
}

/// Runs the checks of `config` accepted by `filter`, writing reports into
/// `out` (or the config's `output`).
fn run_filtered(
    config: &ExperimentConfig,
    out: Option<&Path>,
    seed: u64,
    filter: impl Fn(CheckKind) -> bool,
) -> Result<RunSummary> {
    let space = config.space.build()?;
    let kernel = minkowski_kernel(space.dim());
    let oracle = minkowski_oracle(kernel);
    let ctx = CheckContext::new(&oracle, &space);
    let measures = config
        .measures
        .iter()
        .map(|(k, v)| Ok((k.clone(), v.build(&space)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let dir = out.map_or_else(|| config.output.clone(), Path::to_path_buf);
    let mut outcomes = Vec::new();
    for check in config.checks.iter().filter(|c| filter(c.kind())) {
        let report = run_check(check, &measures, &ctx)
            .map_err(|e| Error::Config(format!("check '{}': {e}", check.name())))?;
        let (json, csv) = write_report(&dir, check.name(), &report)?;
        outcomes.push(CheckOutcome { name: check.name().to_string(), pass: report.pass, report: json, table: csv });
    }
    let pass = outcomes.iter().all(|o| o.pass);
    let summary = RunSummary { seed, checks: outcomes, pass };
    write_atomic(&dir.join("summary.json"), serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok(summary)
}

/// Runs every check of the config at `path`.
pub fn run(path: &Path, out: Option<&Path>, seed: u64) -> Result<RunSummary> {
    let config = ExperimentConfig::load(path)?;
    run_filtered(&config, out, seed, |_| true)
}

fn summary_exit(summary: &RunSummary) -> i32 {
    for c in &summary.checks {
        println!("{} {} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.report.display());
    }
    if summary.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn config_command(args: &ConfigArgs, filter: impl Fn(CheckKind) -> bool) -> Result<i32> {
    let config = ExperimentConfig::load(&args.config)?;
    let summary = run_filtered(&config, args.out.as_deref(), args.seed, filter)?;
    if summary.checks.is_empty() {
        return Err(Error::Config("the config contains no checks for this subcommand".into()));
    }
    Ok(summary_exit(&summary))
}

fn coeffs_command(a: &CoeffsArgs) -> Result<i32> {
    crate::coeffs::CoeffParams::new(a.k, a.n, a.t, a.theta)?;
    let v = match a.kind {
        CoeffKind::Sigma => sigma_kn(a.k, a.n, a.t, a.theta),
        CoeffKind::Tau => tau_kn(a.k, a.n, a.t, a.theta),
    };
    println!("{v}");
    Ok(EXIT_PASS)
}

fn transport_command(a: &TransportArgs) -> Result<i32> {
    let text = fs::read_to_string(&a.config)?;
    let problem: TransportProblem =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", a.config.display())))?;
    let dim = problem
        .mu0
        .first()
        .map(|a| a.at.dim())
        .ok_or_else(|| Error::Config("mu0 has no atoms".into()))?;
    let result = problem.solve(&minkowski_kernel(dim))?;
    println!("feasible {}", result.feasible);
    println!("objective {}", result.objective);
    println!("monge_defect {}", result.monge_defect);
    if let Some(dir) = &a.out {
        write_atomic(&dir.join("coupling.csv"), result.coupling.to_csv().as_bytes())?;
        let summary = serde_json::json!({
            "feasible": result.feasible,
            "objective": result.objective,
            "monge_defect": result.monge_defect,
            "p": result.p,
        });
        write_atomic(&dir.join("transport.json"), serde_json::to_string_pretty(&summary)?.as_bytes())?;
    }
    Ok(EXIT_PASS)
}

fn emit(report: &CheckReport, out: Option<&Path>, name: &str) -> Result<i32> {
    if let Some(dir) = out {
        let (json, _) = write_report(dir, name, report)?;
        println!("report {}", json.display());
    }
    println!("{}", if report.pass { "PASS" } else { "FAIL" });
    Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
}

fn bm_command(a: &BmArgs) -> Result<i32> {
    let half = 0.5 * a.side0.max(a.side1);
    let t_lo = -0.5 * a.side0 - 0.5;
    let t_hi = a.sep + 0.5 * a.side1 + 0.5;
    let space = build_grid_space(&[[t_lo, t_hi], [-half, half]], &[a.resolution, a.resolution], Weight::Zero)?;
    let oracle = minkowski_oracle(minkowski_kernel(1));
    let ctx = CheckContext::new(&oracle, &space);
    let (h0, h1) = (0.5 * a.side0, 0.5 * a.side1);
    let a0 = space.cells_in_box(&[-h0, -h0], &[h0, h0]);
    let a1 = space.cells_in_box(&[a.sep - h1, -h1], &[a.sep + h1, h1]);
    let report = brunn_minkowski(&a0, &a1, a.t, a.k, &a.nprime, a.eps, &ctx)?;
    println!("measure_t {}", report.quantities["measure_t"]);
    for e in &report.entries {
        println!("{} N'={} lhs={} rhs={} margin={}", e.label, e.nprime.unwrap_or(f64::NAN), e.lhs, e.rhs, e.margin);
    }
    emit(&report, a.out.as_deref(), "brunn_minkowski")
}

fn bg_command(a: &BgArgs) -> Result<i32> {
    let res = a.resolution;
    let h = a.big_t / res as f64;
    let half = 0.5 * a.big_t;
    let space = build_grid_space(&[[-0.5 * h, a.big_t - 0.5 * h], [-half, half]], &[res, res], Weight::Zero)?;
    let kernel = minkowski_kernel(1);
    let oracle = minkowski_oracle(kernel);
    let ctx = CheckContext::new(&oracle, &space);
    let x = Event::new(&[0.0, 0.0]);
    let set = causal_diamond(&space, &kernel, &x, &Event::new(&[a.big_t, 0.0]));
    let input = BishopGromovInput {
        x,
        set: &set,
        r: a.r,
        big_r: a.big_r,
        k: a.k,
        n: a.n,
        delta: a.delta.unwrap_or(4.0 * h),
        eps: a.eps,
    };
    let report = bishop_gromov(&input, &ctx)?;
    let model = report.labeled("v_full").next().map_or(f64::NAN, |e| e.lhs.to_f64());
    println!("volume_ratio {:.4} model {:.4}", report.quantities["volume_ratio"], model);
    println!("shell_ratio {:.4}", report.quantities["shell_ratio"]);
    emit(&report, a.out.as_deref(), "bishop_gromov")
}

/// Random symmetric positive definite matrix `G Gᵀ/n + 0.01 I`.
pub fn random_spd(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &g * g.transpose() / n as f64 + DMatrix::identity(n, n) * 0.01
}

/// Smooth-model suite: σ-equality ODE, τ comparison ODE, random dilations
/// and the Riccati flow.
pub fn smooth_verify(k: f64, nprime: f64, theta: f64, dim: usize, trials: usize, seed: u64) -> Result<CheckReport> {
    let grid = dyadic_grid(6);
    let spec = serde_json::json!({
        "K": k, "Nprime": nprime, "theta": theta, "dim": dim, "trials": trials, "seed": seed
    });
    let mut report = CheckReport::new("smooth_verify", spec, 1e-8);

    let j = sigma_equality_profile(k, nprime, theta, 0.8, 1.7, &grid)?;
    let samples: Vec<(f64, f64)> = grid.iter().copied().zip(j).collect();
    let eq = verify_distortion_concavity(&samples, theta, k, nprime, 1e-8)?;
    for e in eq.labeled("sigma") {
        report.push(ReportEntry::new(e.t, e.nprime, ExtReal::Finite(e.margin.to_f64().abs()), ExtReal::Finite(1e-8)).labeled("sigma_equality"));
    }

    let ode = tau_comparison_coefficients(k, nprime, theta, &grid)?;
    let tau_err = grid
        .iter()
        .zip(&ode)
        .map(|(&t, v)| (v - tau_kn(k, nprime, t, theta).to_f64()).abs())
        .fold(0.0, f64::max);
    report.quantity("tau_comparison_error", tau_err);
    report.push(ReportEntry::new(None, Some(nprime), ExtReal::Finite(tau_err), ExtReal::Finite(1e-8)).labeled("tau_comparison"));

    let np = nprime.max(dim as f64);
    let model = WeightedFlatModel::flat(dim, np)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; dim];
    x[0] = 1.0;
    let mut riccati_err = 0.0f64;
    for _ in 0..trials {
        let dx = random_spd(&mut rng, dim);
        let field = TransportField::linear(dx.clone(), DVector::zeros(dim))?;
        let recs = jacobian_along_transport(&model, &field, &x, &grid)?;
        let samples: Vec<(f64, f64)> = recs.iter().map(|r| (r.t, r.j)).collect();
        let r = verify_distortion_concavity(&samples, 1.0, 0.0, np, 1e-10)?;
        let worst = r.worst_for("sigma").to_f64();
        report.push(ReportEntry::new(None, Some(np), ExtReal::ZERO, ExtReal::Finite(worst)).labeled("dilation"));
        let closed = riccati_flat(&dx, &[1.0])?;
        riccati_err = riccati_err.max((&closed[0] - integrate_riccati_rk4(&dx, 1.0, 2000)).amax());
    }
    report.quantity("riccati_error", riccati_err);
    report.push(ReportEntry::new(None, None, ExtReal::Finite(riccati_err), ExtReal::Finite(1e-8)).labeled("riccati"));
    let mut report = report.finalize();
    report.tolerance = 1e-8;
    Ok(report)
}

fn smooth_command(a: &SmoothArgs) -> Result<i32> {
    let report = smooth_verify(a.k, a.nprime, a.theta, a.dim, a.trials, a.seed)?;
    println!("tau_comparison_error {:e}", report.quantities["tau_comparison_error"]);
    println!("riccati_error {:e}", report.quantities["riccati_error"]);
    println!("dilation_worst_margin {}", report.worst_for("dilation"));
    emit(&report, a.out.as_deref(), "smooth_verify")
}

fn configure_threads() {
    if let Some(n) = std::env::var("LOROT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    configure_threads();
    let outcome = match &cli.command {
        Command::Coeffs(a) => coeffs_command(a),
        Command::Transport(a) => transport_command(a),
        Command::CheckTcd(a) => config_command(a, |k| k == CheckKind::Tcd),
        Command::CheckTmcp(a) => config_command(a, |k| k == CheckKind::Tmcp),
        Command::GoodGeodesic(a) => config_command(a, |k| k == CheckKind::Good),
        Command::Midpoint(a) => config_command(a, |k| k == CheckKind::Midpoint),
        Command::Run(a) => config_command(a, |_| true),
        Command::BrunnMinkowski(a) => bm_command(a),
        Command::BishopGromov(a) => bg_command(a),
        Command::SmoothVerify(a) => smooth_command(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
