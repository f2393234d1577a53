//! Command-line front end: JSON experiment configs in, JSON and CSV out.
//!
//! Exit codes: 0 ok, 2 configuration, 3 domain or solver failure, 4 low
//! effective sample size, 5 degenerate grid.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::asymptotics::{geometric_grid, kesten_goldie_grid, run_grid_with, GridReport, Method, MIN_ESS};
use crate::cgf::{alpha_bar, cramer_root, cumulant_profile, hypothesis_report, rate_i, solve_alpha, CumulantProfile, HypothesisReport};
use crate::engine::{
    clt_diagnostics, estimate_event, estimate_event_pivot, estimate_ruin, pointwise_plan, ruin_horizon, twophase_plan,
    CltDiagnostics, PassageIndex, TiltSchedule,
};
use crate::error::{Error, Result};
use crate::estimate::EstimateRecord;
use crate::laws::{ALawSpec, InnovationLaw};
use crate::oracle::{exact_tau_pmf, DiscreteInstance};
use crate::walk_ldp::{exact_gaussian_walk_tail, mc_walk_tail, near_upper_edge, petrov_prob, PetrovQuery};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_LOW_CONFIDENCE: i32 = 4;
pub const EXIT_DEGENERATE_GRID: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "perpetuity", version, about = "First-passage asymptotics of perpetuity sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cumulant profile and hypothesis checks for a law and slope.
    Analyze(CommonArgs),
    /// One rare-event estimate.
    Simulate(CommonArgs),
    /// Grid experiment with regression summary.
    Verify(CommonArgs),
    /// Sharp approximation of the multiplicative walk tail.
    Walk(CommonArgs),
    /// Exact passage-time law of a discrete instance.
    Oracle(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output prefix for `verify`; `<out>.csv` and `<out>.json` are written.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub law: Option<InnovationLaw>,
    #[serde(default)]
    pub analyze: Option<AnalyzeBlock>,
    #[serde(default)]
    pub simulate: Option<SimulateBlock>,
    #[serde(default)]
    pub verify: Option<VerifyBlock>,
    #[serde(default)]
    pub walk: Option<WalkBlock>,
    #[serde(default)]
    pub oracle: Option<DiscreteInstance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeBlock {
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimTarget {
    Pointwise,
    Ruin,
    Clt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    #[default]
    Tilted,
    Twophase,
    Naive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    pub target: SimTarget,
    #[serde(default)]
    pub rho: Option<f64>,
    pub u: f64,
    /// Paths, or conditional hits for `clt`.
    pub samples: usize,
    #[serde(default)]
    pub method: MethodName,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub index: PassageIndex,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub horizon_factor: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Thm1,
    Thm2,
    Kg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    #[serde(default = "geometric")]
    pub spacing: String,
}

fn geometric() -> String {
    "geometric".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    pub regime: Regime,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub method: Option<MethodName>,
    #[serde(default)]
    pub index: PassageIndex,
    pub u_grid: UGrid,
    pub samples: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// A scalar or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkBlock {
    pub n: OneOrMany<u64>,
    pub c: OneOrMany<f64>,
    #[serde(default)]
    pub gamma: f64,
    /// Tilted Monte Carlo check when set together with a seed.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeOutput {
    pub alpha: f64,
    pub alpha_bar: Option<f64>,
    #[serde(rename = "rate_I")]
    pub rate_i: Option<f64>,
    pub alpha_min: Option<f64>,
    pub alpha0: Option<f64>,
    pub rho0: Option<f64>,
    pub sigma0: Option<f64>,
    pub profile: CumulantProfile,
    pub hypothesis_report: HypothesisReport,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateOutput {
    #[serde(flatten)]
    pub record: EstimateRecord,
    pub k_u: Option<u64>,
    /// Targeted value of `τ_u`.
    pub step: Option<u64>,
    pub alpha: Option<f64>,
    pub schedule: Option<TiltSchedule>,
    pub low_confidence: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltOutput {
    #[serde(flatten)]
    pub diagnostics: CltDiagnostics,
    pub low_confidence: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkLine {
    pub n: u64,
    pub c: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub petrov: f64,
    pub exact: Option<f64>,
    pub ratio: Option<f64>,
    pub near_upper_edge: bool,
    pub mc: Option<EstimateRecord>,
}

/// Text for stdout plus an exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_DOMAIN,
    }
}

/// Machine-readable error payload.
pub fn error_json(err: &Error) -> String {
    serde_json::json!({ "error": err.kind(), "message": err.to_string() }).to_string()
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(law) = &cfg.law {
        law.validate()?;
    }
    Ok(cfg)
}

fn need_law(cfg: &ExperimentConfig) -> Result<InnovationLaw> {
    cfg.law.ok_or_else(|| Error::Config("missing `law` block".into()))
}

fn need<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T> {
    block.as_ref().ok_or_else(|| Error::Config(format!("missing `{name}` block")))
}

fn need_seed(over: Option<u64>, cfg: Option<u64>) -> Result<u64> {
    over.or(cfg).ok_or_else(|| Error::Config("a seed is required for stochastic commands".into()))
}

fn positive(x: f64, what: &str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Config(format!("{what} must be positive and finite, got {x}")))
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serialisable output")
}

pub fn cmd_analyze(cfg: &ExperimentConfig) -> Result<AnalyzeOutput> {
    let law = need_law(cfg)?;
    let rho = need(&cfg.analyze, "analyze")?.rho;
    if !rho.is_finite() {
        return Err(Error::Config(format!("rho must be finite, got {rho}")));
    }
    let alpha = solve_alpha(&law, rho)?;
    let profile = cumulant_profile(&law);
    let report = hypothesis_report(&law, alpha)?;
    let mut warnings = Vec::new();
    if matches!(law.a, ALawSpec::TwoPoint { .. }) {
        warnings.push("oracle-only law: lattice A, sharp asymptotics do not apply".to_string());
    }
    let (abar, rate) = if rho > 0.0 { (Some(alpha_bar(&law, alpha)?), Some(rate_i(&law, rho)?)) } else { (None, None) };
    Ok(AnalyzeOutput {
        alpha,
        alpha_bar: abar,
        rate_i: rate,
        alpha_min: profile.alpha_min,
        alpha0: profile.alpha0,
        rho0: profile.rho0,
        sigma0: profile.sigma0,
        profile,
        hypothesis_report: report,
        warnings,
    })
}

/// Result of `simulate`: either an estimate or a CLT diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub enum SimulateResult {
    Estimate(SimulateOutput),
    Clt(CltOutput),
}

impl SimulateResult {
    pub fn low_confidence(&self) -> bool {
        match self {
            SimulateResult::Estimate(o) => o.low_confidence,
            SimulateResult::Clt(o) => o.low_confidence,
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            SimulateResult::Estimate(o) => to_json(o),
            SimulateResult::Clt(o) => to_json(o),
        }
    }
}

pub fn cmd_simulate(cfg: &ExperimentConfig, args: &CommonArgs) -> Result<SimulateResult> {
    let law = need_law(cfg)?;
    let block = need(&cfg.simulate, "simulate")?;
    let seed = need_seed(args.seed, block.seed)?;
    let samples = args.samples.unwrap_or(block.samples);
    if samples < 2 {
        return Err(Error::Config(format!("samples must be at least 2, got {samples}")));
    }
    let u = positive(block.u, "u")?;
    let need_rho = || block.rho.ok_or_else(|| Error::Config("pointwise target needs `rho`".into()));
    let (record, plan_steps, alpha, schedule, warnings) = match block.target {
        SimTarget::Pointwise => {
            let rho = need_rho()?;
            let plan = match block.method {
                MethodName::Twophase => {
                    let beta = block.beta.ok_or_else(|| Error::Config("twophase method needs `beta`".into()))?;
                    twophase_plan(&law, rho, beta, u, block.index)?
                }
                _ => pointwise_plan(&law, rho, u, block.index)?,
            };
            let schedule = if block.method == MethodName::Naive { TiltSchedule::Untilted } else { plan.schedule };
            let rec = match schedule {
                TiltSchedule::TwoPhase { n1, .. } if plan.step > 1 => {
                    estimate_event_pivot(&law, schedule, u, plan.step, n1.clamp(1, plan.step - 1), samples, seed)?
                }
                _ => estimate_event(&law, schedule, u, plan.step, samples, seed)?,
            };
            (rec, Some((plan.k_u, plan.step)), Some(plan.alpha), Some(schedule), plan.warnings)
        }
        SimTarget::Ruin => {
            let hf = block.horizon_factor.unwrap_or(4);
            if hf < 2 {
                return Err(Error::Config(format!("horizon_factor must be at least 2, got {hf}")));
            }
            let profile = cramer_root(&law)?;
            let n_max = ruin_horizon(u, profile.rho0.unwrap(), hf)?;
            let alpha0 = profile.alpha0.unwrap();
            let rec = estimate_ruin(&law, u, samples, hf, seed)?;
            let mut warnings = Vec::new();
            if rec.censored_weight > 0.0 {
                warnings.push(format!("censored weight {} not included in the estimate", rec.censored_weight));
            }
            (rec, None, Some(alpha0), Some(TiltSchedule::ConstantTilt { s: alpha0, horizon: n_max }), warnings)
        }
        SimTarget::Clt => {
            let diagnostics = clt_diagnostics(&law, u, samples, seed)?;
            let low = !(diagnostics.ess >= MIN_ESS);
            return Ok(SimulateResult::Clt(CltOutput { diagnostics, low_confidence: low, warnings: vec![] }));
        }
    };
    let low_confidence = !(record.ess >= MIN_ESS);
    Ok(SimulateResult::Estimate(SimulateOutput {
        record,
        k_u: plan_steps.map(|p| p.0),
        step: plan_steps.map(|p| p.1),
        alpha,
        schedule,
        low_confidence,
        warnings,
    }))
}

pub fn cmd_verify(cfg: &ExperimentConfig, args: &CommonArgs) -> Result<GridReport> {
    let law = need_law(cfg)?;
    let block = need(&cfg.verify, "verify")?;
    let seed = need_seed(args.seed, block.seed)?;
    let samples = args.samples.unwrap_or(block.samples);
    if samples < 2 {
        return Err(Error::Config(format!("samples must be at least 2, got {samples}")));
    }
    if block.u_grid.spacing != "geometric" {
        return Err(Error::Config(format!("unsupported grid spacing '{}'", block.u_grid.spacing)));
    }
    let grid = geometric_grid(block.u_grid.lo, block.u_grid.hi, block.u_grid.points)?;
    match block.regime {
        Regime::Kg => kesten_goldie_grid(&law, &grid, samples, seed),
        Regime::Thm1 | Regime::Thm2 => {
            let rho = block.rho.ok_or_else(|| Error::Config("pointwise regimes need `rho`".into()))?;
            let default = if block.regime == Regime::Thm2 { MethodName::Twophase } else { MethodName::Tilted };
            let method = match block.method.unwrap_or(default) {
                MethodName::Tilted => Method::Tilted,
                MethodName::Naive => Method::Naive,
                MethodName::Twophase => Method::Twophase {
                    beta: block.beta.ok_or_else(|| Error::Config("twophase method needs `beta`".into()))?,
                },
            };
            run_grid_with(&law, rho, &grid, samples, method, block.index, seed)
        }
    }
}

pub fn cmd_walk(cfg: &ExperimentConfig, args: &CommonArgs) -> Result<Vec<WalkLine>> {
    let law = need_law(cfg)?;
    let block = need(&cfg.walk, "walk")?;
    let samples = args.samples.or(block.samples);
    let seed = args.seed.or(block.seed);
    if samples.is_some() && seed.is_none() {
        return Err(Error::Config("walk Monte Carlo needs a seed".into()));
    }
    let mut lines = Vec::new();
    for (i, n) in block.n.to_vec().into_iter().enumerate() {
        if n == 0 {
            return Err(Error::Config("walk length n must be at least 1".into()));
        }
        for (j, c) in block.c.to_vec().into_iter().enumerate() {
            let q = PetrovQuery::new(&law, n, c, block.gamma)?;
            let petrov = petrov_prob(&law, &q)?;
            let t = (n as f64 * (c + block.gamma)).exp();
            let exact = match law.a {
                ALawSpec::LogNormal { mu, sigma } => Some(exact_gaussian_walk_tail(mu, sigma, n, t)),
                _ => None,
            };
            let mc = match (samples, seed) {
                (Some(s), Some(seed)) => {
                    let sub = crate::rng::substream_seed(seed, (i * 1_000_003 + j) as u64);
                    Some(mc_walk_tail(&law, n, t, s, q.alpha, sub)?)
                }
                _ => None,
            };
            lines.push(WalkLine {
                n,
                c,
                gamma: block.gamma,
                alpha: q.alpha,
                petrov,
                ratio: exact.map(|e| petrov / e),
                exact,
                near_upper_edge: near_upper_edge(&law, c),
                mc,
            });
        }
    }
    Ok(lines)
}

/// Accepts either a full config with an `oracle` block or a bare instance.
pub fn oracle_instance(text: &str) -> Result<DiscreteInstance> {
    match serde_json::from_str::<DiscreteInstance>(text) {
        Ok(inst) => Ok(inst),
        Err(_) => {
            let cfg = parse_config(text)?;
            cfg.oracle.ok_or_else(|| Error::Config("missing `oracle` block".into()))
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn dispatch(command: &Command) -> Result<Outcome> {
    match command {
        Command::Analyze(a) => {
            let out = cmd_analyze(&load_config(&a.config)?)?;
            Ok(Outcome { stdout: to_json(&out), code: EXIT_OK })
        }
        Command::Simulate(a) => {
            let res = cmd_simulate(&load_config(&a.config)?, a)?;
            let code = if res.low_confidence() { EXIT_LOW_CONFIDENCE } else { EXIT_OK };
            Ok(Outcome { stdout: res.to_json(), code })
        }
        Command::Verify(a) => {
            let report = cmd_verify(&load_config(&a.config)?, a)?;
            let summary = to_json(&report.summary());
            let prefix = a.out.clone().unwrap_or_else(|| PathBuf::from("report"));
            write_file(&with_ext(&prefix, "csv"), &report.to_csv())?;
            write_file(&with_ext(&prefix, "json"), &summary)?;
            let code = if 2 * report.excluded_count() > report.rows.len() { EXIT_DEGENERATE_GRID } else { EXIT_OK };
            Ok(Outcome { stdout: summary, code })
        }
        Command::Walk(a) => {
            let lines = cmd_walk(&load_config(&a.config)?, a)?;
            Ok(Outcome { stdout: lines.iter().map(to_json).collect::<Vec<_>>().join("\n"), code: EXIT_OK })
        }
        Command::Oracle(a) => {
            let text = fs::read_to_string(&a.config).map_err(|e| Error::Config(format!("{}: {e}", a.config.display())))?;
            let pmf = exact_tau_pmf(&oracle_instance(&text)?)?;
            let csv = pmf.to_csv();
            Ok(Outcome { stdout: csv.trim_end().to_string(), code: EXIT_OK })
        }
    }
}

fn threads_of(command: &Command) -> Option<usize> {
    match command {
        Command::Analyze(a) | Command::Simulate(a) | Command::Verify(a) | Command::Walk(a) | Command::Oracle(a) => a.threads,
    }
}

/// Runs a parsed command inside a pool of the requested size.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    match threads_of(&cli.command) {
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| dispatch(&cli.command))
        }
        None => dispatch(&cli.command),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{}", out.stdout);
            out.code
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}
