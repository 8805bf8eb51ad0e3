//! Command-line front end: a JSON run configuration, flag overrides, and one
//! command per process writing CSV or an approximant file.
//!
//! Exit codes: 0 pass, 1 computed failure, 2 usage error, 3 refused
//! precondition.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundsError};
use crate::bump::{alpha_jet, pn_poly, theta_jet, Hump};
use crate::taylor::{parse, sup_norm_with, sup_norms_by_order, Expr};
use crate::transforms::{bounded_pipeline, halfline_pipeline, PipelineOptions, TransformError};
use crate::weierstrass::{lambda_for_eps, transform_jet, windowed, Supported, SupportedFn, WeierstrassError};
use crate::whitney::verify::grid;
use crate::whitney::{self, build_approximant, Approximant, Case, Mode, ProblemSpec, WhitneyError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Approximate,
    Verify,
    Bound,
    BumpAudit,
    WeierstrassAudit,
    Transform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EnvelopeKind {
    Thm2,
    Thm3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Bounded,
    Halfline,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub points: usize,
    /// Defaults to the protected region.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { points: 401, lo: None, hi: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundConfig {
    /// Defaults by case: thm2 on the line, thm3 on the half-line.
    pub envelope: Option<EnvelopeKind>,
    pub radii: Vec<f64>,
    pub angles: usize,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self { envelope: None, radii: vec![0.5, 1.0, 1.5, 2.0], angles: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformConfig {
    pub kind: TransformKind,
    /// Bounded case only.
    pub interval: Option<(f64, f64)>,
    /// Seeded points for the map round-trip check.
    pub roundtrip_points: usize,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self { kind: TransformKind::Bounded, interval: None, roundtrip_points: 256 }
    }
}

/// One run. Every field has a default so a config file may be partial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub f: Option<String>,
    pub eps: Option<String>,
    pub rho: Option<String>,
    pub r: Option<u32>,
    pub case: Case,
    /// Defaults to √2 on the line and √(1/2) on the half-line.
    pub delta: Option<f64>,
    pub stages: usize,
    pub mode: Mode,
    pub grid: GridConfig,
    /// Approximant file read by verify and bound; built from the config when absent.
    pub approximant: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub bound: BoundConfig,
    pub transform: TransformConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            f: None,
            eps: None,
            rho: None,
            r: None,
            case: Case::R,
            delta: None,
            stages: 3,
            mode: Mode::Practical,
            grid: GridConfig::default(),
            approximant: None,
            out: None,
            seed: 0,
            bound: BoundConfig::default(),
            transform: TransformConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CaseArg {
    #[value(name = "R")]
    R,
    #[value(name = "Rpos")]
    Rpos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Certified,
    Practical,
}

#[derive(Debug, Parser)]
#[command(name = "whitney", version, about = "Explicit holomorphic tangential approximants")]
struct Args {
    command: Command,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long, value_enum)]
    case: Option<CaseArg>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Approximant file to read (verify, bound).
    #[arg(long)]
    approximant: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Refused(_) => 3,
        }
    }
}

impl From<WhitneyError> for CliError {
    fn from(e: WhitneyError) -> Self {
        match e {
            WhitneyError::Spec(_) | WhitneyError::Serial(_) => CliError::Usage(e.to_string()),
            WhitneyError::Condition(_) | WhitneyError::Unprotected { .. } | WhitneyError::Smoothness { .. } => CliError::Refused(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::Whitney(w) => w.into(),
            TransformError::Unprotected { .. } | TransformError::Domain(_) | TransformError::Pole(_) => CliError::Refused(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Whitney(w) => w.into(),
            BoundsError::Refused(m) => CliError::Refused(m),
            BoundsError::Domain(_) => CliError::Refused(e.to_string()),
            BoundsError::Taylor(_) => CliError::Failed(e.to_string()),
        }
    }
}

impl From<crate::taylor::TaylorError> for CliError {
    fn from(e: crate::taylor::TaylorError) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<WeierstrassError> for CliError {
    fn from(e: WeierstrassError) -> Self {
        CliError::Failed(e.to_string())
    }
}

/// What a command produced: the artifact (CSV or JSON), a human summary,
/// and whether the computed checks passed.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub artifact: String,
    pub summary: String,
    pub pass: bool,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn expr(field: &Option<String>, name: &str) -> Result<Expr, CliError> {
        let s = field.as_deref().ok_or_else(|| CliError::Usage(format!("missing --{name}")))?;
        parse(s).map_err(|e| CliError::Usage(format!("--{name}: {e}")))
    }

    pub fn problem(&self) -> Result<ProblemSpec, CliError> {
        let f = Self::expr(&self.f, "f")?;
        let eps = Self::expr(&self.eps, "eps")?;
        let rho = Self::expr(&self.rho.clone().or_else(|| Some("0".into())), "rho")?;
        let delta = self.delta.unwrap_or_else(|| ProblemSpec::default_delta(self.case));
        if !(delta > 0.0) {
            return Err(CliError::Usage(format!("delta must be positive, got {delta}")));
        }
        Ok(ProblemSpec::new(f, eps, rho, self.r, self.case, delta))
    }

    fn check_ranges(&self) -> Result<(), CliError> {
        if self.stages == 0 || self.stages > 64 {
            return Err(CliError::Usage(format!("stages must be in 1..=64, got {}", self.stages)));
        }
        if self.grid.points == 0 {
            return Err(CliError::Usage("grid.points must be positive".into()));
        }
        Ok(())
    }
}

fn parse_args(argv: &[String]) -> Result<RunConfig, CliError> {
    let args = Args::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    cfg.command = Some(args.command);
    if let Some(v) = args.f {
        cfg.f = Some(v);
    }
    if let Some(v) = args.eps {
        cfg.eps = Some(v);
    }
    if let Some(v) = args.rho {
        cfg.rho = Some(v);
    }
    if args.r.is_some() {
        cfg.r = args.r;
    }
    if let Some(c) = args.case {
        cfg.case = match c {
            CaseArg::R => Case::R,
            CaseArg::Rpos => Case::Rpos,
        };
    }
    if args.delta.is_some() {
        cfg.delta = args.delta;
    }
    if let Some(v) = args.stages {
        cfg.stages = v;
    }
    if let Some(m) = args.mode {
        cfg.mode = match m {
            ModeArg::Certified => Mode::Certified,
            ModeArg::Practical => Mode::Practical,
        };
    }
    if args.approximant.is_some() {
        cfg.approximant = args.approximant;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(p) = args.points {
        cfg.grid.points = p;
    }
    Ok(cfg)
}

fn load_or_build(cfg: &RunConfig) -> Result<Approximant, CliError> {
    match &cfg.approximant {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            Ok(whitney::from_json(&text)?)
        }
        None => Ok(build_approximant(&cfg.problem()?, cfg.stages, cfg.mode)?),
    }
}

fn summarize(ap: &Approximant) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "mode {} case {} stages {}", ap.mode, ap.scheme.case, ap.stages.len());
    for st in &ap.stages {
        let _ = writeln!(s, "stage {}: ln lambda {:.6}, r {}, support [{}, {}]", st.n, st.ln_lambda, st.ledger.r_n, st.support.0, st.support.1);
    }
    match ap.protected_region() {
        Some((lo, hi)) => {
            let _ = writeln!(s, "protected region [{lo}, {hi}]");
        }
        None => s.push_str("protected region: none\n"),
    }
    let _ = writeln!(s, "tail: ln c = {:.6}, n0 = {:?}, ln M = {:.6}", ap.tail.ln_c, ap.tail.n0, ap.tail.ln_m);
    s
}

pub fn cmd_approximate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ap = build_approximant(&cfg.problem()?, cfg.stages, cfg.mode)?;
    Ok(Outcome { artifact: whitney::to_json(&ap)?, summary: summarize(&ap), pass: true })
}

fn grid_for(cfg: &RunConfig, protected: (f64, f64)) -> Vec<f64> {
    grid(cfg.grid.lo.unwrap_or(protected.0), cfg.grid.hi.unwrap_or(protected.1), cfg.grid.points)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ap = load_or_build(cfg)?;
    let protected = ap.protected_region().ok_or_else(|| CliError::Refused("a single stage has no protected region; build at least 2".into()))?;
    let report = whitney::verify(&ap, &grid_for(cfg, protected))?;
    let summary = format!(
        "{} rows, protected [{}, {}], worst margin {:e}: {}\n",
        report.rows.len(),
        protected.0,
        protected.1,
        report.worst_margin,
        if report.pass { "PASS" } else { "FAIL" }
    );
    Ok(Outcome { artifact: report.to_csv(), summary, pass: report.pass })
}

pub fn cmd_bound(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ap = load_or_build(cfg)?;
    let consts = bounds::derive_constants(&ap)?;
    let kind = cfg.bound.envelope.unwrap_or(match ap.scheme.case {
        Case::R => EnvelopeKind::Thm2,
        Case::Rpos => EnvelopeKind::Thm3,
    });
    let report = match kind {
        EnvelopeKind::Thm2 => bounds::compare_thm2(&ap, &consts, &cfg.bound.radii, cfg.bound.angles)?,
        EnvelopeKind::Thm3 => bounds::compare_thm3(&ap, &consts, &cfg.bound.radii, cfg.bound.angles)?,
    };
    let checks = bounds::lambda_bound_check(&ap, &consts)?;
    let mut summary = consts.trace.join("\n");
    summary.push('\n');
    for c in &checks {
        let _ = writeln!(summary, "stage {}: ln lambda {:.6} <= ln(lambda(s) + 1) = {:.6} at s = {}: {}", c.n, c.ln_lambda, c.ln_bound, c.s, c.pass);
    }
    let pass = report.pass && checks.iter().all(|c| c.pass);
    let _ = writeln!(summary, "{}", if pass { "PASS" } else { "FAIL" });
    Ok(Outcome { artifact: report.to_csv(), summary, pass })
}

/// Coefficient, θ and α derivative bounds as CSV rows.
pub fn cmd_bump_audit(_cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut csv = String::from("check,n,measured,bound,pass\n");
    let mut pass = true;
    let mut fact = BigInt::from(1);
    for n in 1..=25usize {
        fact *= n;
        let bound = BigInt::from(2).pow(n as u32 - 1) * &fact;
        let m = pn_poly(n).max_abs();
        let ok = m <= bound;
        pass &= ok;
        let _ = writeln!(csv, "pn-coefficient,{n},{m},{bound},{ok}");
    }
    let theta = sup_norms_by_order(|t, k| Ok::<_, CliError>(theta_jet(t, k)), (0.0, 1.0), 10, 8193)?;
    for n in 1..=10usize {
        let nf = n as f64;
        let m = theta[n].lower();
        let ln_bound = 3.0 * nf * nf.ln();
        let ok = m.ln() <= ln_bound;
        pass &= ok;
        let _ = writeln!(csv, "theta-derivative,{n},{m:e},{:e},{ok}", ln_bound.exp());
    }
    let alpha = sup_norms_by_order(|t, k| Ok::<_, CliError>(alpha_jet(t, k)), (0.0, 1.0), 8, 8193)?;
    for n in 1..=8usize {
        let nf = n as f64;
        let m = alpha[n].lower();
        let ln_bound = (7.0 * nf + 4.0) * 2f64.ln() + 9.0 * nf * nf.ln();
        let ok = m.ln() <= ln_bound;
        pass &= ok;
        let _ = writeln!(csv, "alpha-derivative,{n},{m:e},{:e},{ok}", ln_bound.exp());
    }
    Ok(Outcome { artifact: csv, summary: format!("bump audit: {}\n", if pass { "PASS" } else { "FAIL" }), pass })
}

/// The windowed f (default t³) on the hump [0, 1, 2, 3], transformed at
/// λ = 1.01 λ(ε) for m ≤ 2 and ε ∈ {1e−1, 1e−2}, plus kernel normalization.
pub fn cmd_weierstrass_audit(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let e = match &cfg.f {
        Some(s) => parse(s).map_err(|e| CliError::Usage(format!("--f: {e}")))?,
        None => parse("t^3").expect("literal"),
    };
    let hump = Hump::new(0.0, 1.0, 2.0, 3.0).map_err(|e| CliError::Failed(e.to_string()))?;
    let f = windowed(e, hump);
    let mut csv = String::from("check,m,eps,lambda,measured,bound,pass\n");
    let mut pass = true;
    let pts = grid(-3.0, 6.0, 2001);
    for m in 0..=2usize {
        let nm = sup_norm_with(|t, k| f.jet(t, k), (0.0, 3.0), m, crate::taylor::DEFAULT_SAMPLES)?.inflated();
        let nm1 = sup_norm_with(|t, k| f.jet(t, k), (0.0, 3.0), m + 1, crate::taylor::DEFAULT_SAMPLES)?.inflated();
        for eps in [1e-1, 1e-2] {
            let lambda = 1.01 * lambda_for_eps(nm, nm1, eps)?;
            let mut worst: f64 = 0.0;
            for &t in &pts {
                let w = transform_jet(&f, lambda, t, m)?;
                let h = f.jet(t, m)?;
                for k in 0..=m {
                    worst = worst.max((w[k] - h[k]).abs());
                }
            }
            let ok = worst <= eps;
            pass &= ok;
            let _ = writeln!(csv, "approximation,{m},{eps:e},{lambda:e},{worst:e},{eps:e},{ok}");
        }
    }
    for lambda in [1.0, 1e3, 1e6, 1e9, 1e12] {
        let one = SupportedFn::new(|t, k| Ok(crate::taylor::Jet::constant(t, 1.0, k)), (-1e3, 1e3));
        let v = transform_jet(&one, lambda, 0.3, 0)?[0];
        let dev = (v - 1.0).abs();
        let ok = dev <= 1e-10;
        pass &= ok;
        let _ = writeln!(csv, "kernel-mass,0,,{lambda:e},{dev:e},1e-10,{ok}");
    }
    Ok(Outcome { artifact: csv, summary: format!("weierstrass audit: {}\n", if pass { "PASS" } else { "FAIL" }), pass })
}

/// Builds g = g_* ∘ Φ ∘ φ^{-1} (bounded interval) or g_* ∘ Ψ (half-line),
/// verifies it on the protected region and checks the map round trips on
/// seeded random points.
pub fn cmd_transform(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let f = RunConfig::expr(&cfg.f, "f")?;
    let eps = RunConfig::expr(&cfg.eps, "eps")?;
    let rho = RunConfig::expr(&cfg.rho.clone().or_else(|| Some("0".into())), "rho")?;
    let opts = PipelineOptions { stages: cfg.stages, mode: cfg.mode, delta: cfg.delta.unwrap_or(PipelineOptions::default().delta) };
    let composed = match cfg.transform.kind {
        TransformKind::Bounded => {
            let iv = cfg.transform.interval.ok_or_else(|| CliError::Usage("transform.interval is required for a bounded interval".into()))?;
            bounded_pipeline(&f, &eps, &rho, iv, opts)?
        }
        TransformKind::Halfline => halfline_pipeline(&f, &eps, &rho, opts)?,
    };
    let protected = composed.protected_region().ok_or_else(|| CliError::Refused("no protected region; build at least 2 stages".into()))?;
    let report = composed.verify(&grid_for(cfg, protected))?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst_rt: f64 = 0.0;
    for map in &composed.chain {
        let (lo, hi) = map.source();
        for _ in 0..cfg.transform.roundtrip_points {
            let u: f64 = rng.gen_range(0.02..0.98);
            let odds = u / (1.0 - u);
            let t = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => lo + (hi - lo) * u,
                (true, false) => lo + odds,
                (false, true) => hi - odds,
                (false, false) => 4.0 * odds.ln(),
            };
            let s = map.forward(t)?;
            worst_rt = worst_rt.max((map.inverse(s) - t).abs() / t.abs().max(1.0));
        }
    }
    let rt_ok = worst_rt <= 1e-12;
    let pass = report.pass && rt_ok;
    let summary = format!(
        "{} rows on [{}, {}], worst margin {:e}; map round trip {:e}: {}\n",
        report.rows.len(),
        cfg.grid.lo.unwrap_or(protected.0),
        cfg.grid.hi.unwrap_or(protected.1),
        report.worst_margin,
        worst_rt,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(Outcome { artifact: report.to_csv(), summary, pass })
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.check_ranges()?;
    let command = cfg.command.ok_or_else(|| CliError::Usage("no command given".into()))?;
    match command {
        Command::Approximate => cmd_approximate(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Bound => cmd_bound(cfg),
        Command::BumpAudit => cmd_bump_audit(cfg),
        Command::WeierstrassAudit => cmd_weierstrass_audit(cfg),
        Command::Transform => cmd_transform(cfg),
    }
}

fn write_artifact(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Failed(e.to_string())),
    }
}

/// Runs one command. The artifact goes to `--out` or `stdout`, the summary
/// and any error to `stderr`. Returns the exit code.
pub fn run(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = parse_args(argv).and_then(|cfg| {
        let outcome = execute(&cfg)?;
        write_artifact(cfg.out.as_deref(), &outcome.artifact, stdout)?;
        Ok(outcome)
    });
    match result {
        Ok(o) => {
            let _ = stderr.write_all(o.summary.as_bytes());
            if o.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}
