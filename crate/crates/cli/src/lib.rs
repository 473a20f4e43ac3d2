//! Command-line front end. Exit codes: 0 when every check passes, 1 when a
//! check fails, 2 for configuration errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sphere_hardy::checks::{identity_suite, random_point, CheckOutcome, IdentityConfig};
use sphere_hardy::functionals::{evaluate, evaluate_radial, GridSpec, Grids, Inequality, InequalityKind, InequalityReport};
use sphere_hardy::functions::{critical_family, smooth_corpus, RadialProfile, TestFunction};
use sphere_hardy::quadrature::{PolarRuleSpec, RadialGrid, SphereGrid};
use sphere_hardy::sharpness::{
    counterexample_search, log_spaced, minimize_quotient, search_grid_spec, sweep, Minimum, Resolution, SearchResult,
    SweepResult,
};

/// Deficit tolerance relative to `A + B + C`.
pub const DEFICIT_TOLERANCE: f64 = 1e-7;

/// Members of the optimizing family placed at the head of every corpus.
/// Their quotients sit within 40% of the sharp constant, so a wrong
/// constant shows up as a violation.
pub const FAMILY_EPS: [f64; 2] = [0.3, 0.1];

#[derive(Debug, Parser)]
#[command(name = "sphere-hardy", version, about = "Numerical checks of Hardy-type inequalities on the unit sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Geometric identities, integration by parts identities and the basic vector inequality.
    VerifyIdentities(IdentityArgs),
    /// Evaluate an inequality over a corpus of random polynomial test functions.
    VerifyInequality(InequalityArgs),
    /// Sweep the optimizing family toward the sharp constant.
    Sharpness(SharpnessArgs),
    /// Random search for counterexamples to the claimed inequality.
    SearchCounterexample(SearchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Subcritical,
    Critical,
    Claimed,
}

impl From<Kind> for InequalityKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Subcritical => Self::Subcritical,
            Kind::Critical => Self::Critical,
            Kind::Claimed => Self::Claimed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; nothing is written when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Gauss nodes per polar panel and per remaining angle.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Grade the polar rule toward the singular points.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub graded: bool,
}

#[derive(Debug, Clone, Args)]
pub struct IdentityArgs {
    /// Restrict to one sphere dimension (default: 2 to 5).
    #[arg(long)]
    pub n: Option<usize>,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-4)]
    pub h: f64,
    /// Sample points per pole.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct InequalityArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Exponent; defaults to 2, or to n for the critical kind.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub corpus_size: usize,
    /// Multiplies the constant on the right-hand side.
    #[arg(long, default_value_t = 1.0)]
    pub rhs_scale: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SharpnessArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long)]
    pub p: Option<f64>,
    /// Comma-separated decreasing list of family parameters.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["eps_min", "eps_max", "eps_steps"])]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub eps_min: Option<f64>,
    #[arg(long)]
    pub eps_max: Option<f64>,
    #[arg(long)]
    pub eps_steps: Option<usize>,
    /// Golden-section search over [eps-min, eps-max] instead of a sweep.
    #[arg(long)]
    pub minimize: bool,
    /// Multiplies the middle coefficient in the reported quotients.
    #[arg(long, default_value_t = 1.0)]
    pub middle_scale: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Validated settings of one run, echoed in every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<InequalityKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    pub graded: bool,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub middle_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iters: Option<usize>,
    pub format: Format,
}

impl RunConfig {
    fn new(command: &str, output: &OutputArgs) -> Self {
        Self {
            command: command.to_string(),
            kind: None,
            n: None,
            p: None,
            grid_n: None,
            graded: true,
            seed: output.seed,
            eps: None,
            middle_scale: None,
            iters: None,
            format: output.format,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityOutput {
    pub config: RunConfig,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub index: usize,
    /// Set for the claimed inequality, whose deficits are reported but not judged.
    pub exploratory: bool,
    pub passed: bool,
    pub report: InequalityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityOutput {
    pub config: RunConfig,
    pub rhs_scale: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub min_relative_deficit: f64,
    pub records: Vec<InequalityRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessOutput {
    pub config: RunConfig,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimum: Option<Minimum>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutput {
    pub config: RunConfig,
    pub result: SearchResult,
}

/// A failure before or during a run, with its exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Run(String),
}

impl From<sphere_hardy::Error> for Failure {
    fn from(e: sphere_hardy::Error) -> Self {
        match e {
            sphere_hardy::Error::Parameter(_) | sphere_hardy::Error::Dimension { .. } => Self::Config(e.to_string()),
            _ => Self::Run(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn config_error<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Config(msg.into()))
}

fn write_output<T: Serialize>(output: &OutputArgs, value: &T, csv: impl FnOnce() -> String) -> Result<(), Failure> {
    let Some(path) = &output.out else {
        return Ok(());
    };
    let text = match output.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Run(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => csv(),
    };
    std::fs::write(path, text).map_err(|e| Failure::Run(format!("writing {}: {e}", path.display())))
}

fn csv(header: &str, rows: impl Iterator<Item = (String, f64)>) -> String {
    let mut out = format!("{header}\n");
    for (a, b) in rows {
        let _ = writeln!(out, "{a},{b}");
    }
    out
}

fn resolve_p(kind: Kind, n: usize, p: Option<f64>) -> Result<Inequality, Failure> {
    let p = match (kind, p) {
        (Kind::Critical, None) => n as f64,
        (_, Some(p)) => p,
        (_, None) => 2.0,
    };
    Ok(Inequality::new(kind.into(), n, p)?)
}

fn check_grid_n(grid_n: Option<usize>) -> Result<(), Failure> {
    match grid_n {
        Some(0) => config_error("--grid-n must be positive"),
        _ => Ok(()),
    }
}

pub fn verify_identities(args: &IdentityArgs) -> Outcome {
    if let Some(n) = args.n {
        if n < 2 {
            return config_error("--n must be at least 2");
        }
    }
    if !(args.h > 0.0 && args.h < 0.1) {
        return config_error("--h must lie in (0, 0.1)");
    }
    if args.points == 0 {
        return config_error("--points must be positive");
    }
    let cfg = IdentityConfig {
        dims: args.n.map_or(vec![2, 3, 4, 5], |n| vec![n]),
        h: args.h,
        seed: args.output.seed,
        points: args.points,
        ..Default::default()
    };
    let mut config = RunConfig::new("verify-identities", &args.output);
    config.n = args.n;
    let checks = identity_suite(&cfg)?;
    println!("{:<38} {:>3} {:>7} {:>11} {:>9}  result", "check", "n", "samples", "worst", "tolerance");
    for c in &checks {
        let n = c.n.map_or("-".to_string(), |n| n.to_string());
        let status = if c.passed { "pass" } else { "FAIL" };
        println!("{:<38} {n:>3} {:>7} {:>11.3e} {:>9.0e}  {status}", c.name, c.samples, c.worst, c.tolerance);
    }
    let passed = checks.iter().all(|c| c.passed);
    let output = IdentityOutput { config, passed, checks };
    write_output(&args.output, &output, || {
        csv("check,worst", output.checks.iter().map(|c| {
            let name = match c.n {
                Some(n) => format!("{} (n={n})", c.name),
                None => c.name.clone(),
            };
            (name, c.worst)
        }))
    })?;
    Ok(passed)
}

/// `(sin d + ε)^{-λ}` for the subcritical and claimed kinds, `L^{μ-ε}` for
/// the critical kind.
fn corpus_family_member(ineq: &Inequality, eps: f64) -> Result<RadialProfile, Failure> {
    Ok(match ineq.kind {
        InequalityKind::Critical => critical_family(ineq.n, eps)?,
        _ => RadialProfile::ShiftedSinPower { shift: eps, exponent: -ineq.base() },
    })
}

pub fn verify_inequality(args: &InequalityArgs) -> Outcome {
    let ineq = resolve_p(args.kind, args.n, args.p)?;
    check_grid_n(args.grid.grid_n)?;
    if args.corpus_size == 0 {
        return config_error("--corpus-size must be positive");
    }
    if !(args.rhs_scale.is_finite() && args.rhs_scale > 0.0) {
        return config_error("--rhs-scale must be positive");
    }
    let mut config = RunConfig::new("verify-inequality", &args.output);
    config.kind = Some(ineq.kind);
    config.n = Some(ineq.n);
    config.p = Some(ineq.p);
    config.grid_n = args.grid.grid_n;
    config.graded = args.grid.graded;

    let exploratory = ineq.kind == InequalityKind::Claimed;
    let grids = Grids::new(ineq.n, GridSpec::for_corpus(&ineq, args.grid.grid_n, args.grid.graded))?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.output.seed);
    let pole = random_point(ineq.n, &mut rng);
    let head = FAMILY_EPS.len().min(args.corpus_size);
    let mut reports = Vec::with_capacity(args.corpus_size);
    for &eps in &FAMILY_EPS[..head] {
        let grid = RadialGrid::new(ineq.n, Resolution::AUTO.rule_for(&ineq, eps))?;
        reports.push(evaluate_radial(&ineq, &corpus_family_member(&ineq, eps)?, &grid)?);
    }
    for f in smooth_corpus(ineq.n, args.corpus_size - head, args.output.seed)? {
        reports.push(evaluate(&ineq, &TestFunction::smooth(f, pole.clone()), &grids)?);
    }
    let records: Vec<InequalityRecord> = reports
        .into_iter()
        .enumerate()
        .map(|(index, report)| {
            let report = report.with_rhs_scale(args.rhs_scale);
            let passed = report.holds(DEFICIT_TOLERANCE);
            InequalityRecord { index, exploratory, passed, report }
        })
        .collect();
    let min_relative_deficit = records
        .iter()
        .map(|r| r.report.relative_deficit())
        .fold(f64::INFINITY, f64::min);
    let failures = records.iter().filter(|r| !r.passed).count();
    let passed = exploratory || failures == 0;
    println!(
        "{} inequality, n = {}, p = {}: {} functions, min deficit/(A+B+C) = {:.4e}, {} below -{:e}{}",
        ineq.kind,
        ineq.n,
        ineq.p,
        records.len(),
        min_relative_deficit,
        failures,
        DEFICIT_TOLERANCE,
        if exploratory { " (exploratory)" } else { "" }
    );
    let output = InequalityOutput {
        config,
        rhs_scale: args.rhs_scale,
        tolerance: DEFICIT_TOLERANCE,
        passed,
        min_relative_deficit,
        records,
    };
    write_output(&args.output, &output, || {
        csv("index,relative_deficit", output.records.iter().map(|r| (r.index.to_string(), r.report.relative_deficit())))
    })?;
    Ok(passed)
}

fn default_eps(kind: InequalityKind) -> Vec<f64> {
    match kind {
        InequalityKind::Critical => vec![0.4, 0.2, 0.1, 0.05],
        _ => vec![1.0, 0.3, 0.1, 0.03, 0.01],
    }
}

fn check_eps(e: f64) -> Result<(), Failure> {
    if e > 0.0 && e <= 1.0 {
        Ok(())
    } else {
        config_error(format!("family parameters must lie in (0, 1], got {e}"))
    }
}

pub fn sharpness(args: &SharpnessArgs) -> Outcome {
    if args.kind == Kind::Claimed {
        return config_error("sharpness sweeps need --kind subcritical or critical");
    }
    let ineq = resolve_p(args.kind, args.n, args.p)?;
    check_grid_n(args.grid.grid_n)?;
    if !(args.middle_scale.is_finite() && args.middle_scale >= 0.0) {
        return config_error("--middle-scale must be nonnegative");
    }
    if args.minimize && args.middle_scale != 1.0 {
        return config_error("--middle-scale applies to sweeps only");
    }
    let resolution = if args.grid.graded {
        Resolution::Graded { nodes: args.grid.grid_n.unwrap_or(16) }
    } else {
        Resolution::Fixed(PolarRuleSpec::plain(args.grid.grid_n.unwrap_or(512)))
    };
    let mut config = RunConfig::new("sharpness", &args.output);
    config.kind = Some(ineq.kind);
    config.n = Some(ineq.n);
    config.p = Some(ineq.p);
    config.grid_n = args.grid.grid_n;
    config.graded = args.grid.graded;

    if args.minimize {
        let (lo, hi) = (args.eps_min.unwrap_or(1e-3), args.eps_max.unwrap_or(1.0));
        check_eps(lo)?;
        check_eps(hi)?;
        if lo >= hi {
            return config_error("--eps-min must be below --eps-max");
        }
        config.eps = Some(vec![hi, lo]);
        let minimum = minimize_quotient(&ineq, lo, hi, resolution)?;
        let target = ineq.constant();
        let passed = minimum.quotient >= target - sphere_hardy::sharpness::LOWER_BOUND_SLACK;
        println!(
            "{} n = {} p = {}: min Q = {:.6} at eps = {:.6e} over {} evaluations (target {:.6})",
            ineq.kind,
            ineq.n,
            ineq.p,
            minimum.quotient,
            minimum.eps,
            minimum.evaluations.len(),
            target
        );
        let output = SharpnessOutput { config, passed, sweep: None, minimum: Some(minimum) };
        write_output(&args.output, &output, || output.minimum.as_ref().unwrap().to_csv())?;
        return Ok(passed);
    }

    let eps = match (&args.eps, args.eps_min, args.eps_max, args.eps_steps) {
        (Some(list), ..) => list.clone(),
        (None, None, None, None) => default_eps(ineq.kind),
        (None, lo, hi, steps) => {
            let (lo, hi) = (lo.unwrap_or(1e-2), hi.unwrap_or(1.0));
            if lo > hi {
                return config_error("--eps-min must not exceed --eps-max");
            }
            log_spaced(hi, lo, steps.unwrap_or(5))
        }
    };
    if eps.is_empty() {
        return config_error("empty --eps list");
    }
    for &e in &eps {
        check_eps(e)?;
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return config_error("--eps values must be strictly decreasing");
    }
    config.eps = Some(eps.clone());
    config.middle_scale = Some(args.middle_scale);
    let result = sweep(&ineq, &eps, resolution)?.with_middle_scale(args.middle_scale)?;
    println!("{:>12} {:>12} {:>12}", "eps", "Q", "B/C");
    for ((e, q), r) in result.eps.iter().zip(&result.quotients).zip(&result.middle_ratios) {
        println!("{e:>12.4e} {q:>12.6} {r:>12.6}");
    }
    let passed = result.passes();
    println!(
        "target {:.6}, final Q {:.6} ({:+.2}%), monotone: {}, {}",
        result.target,
        result.final_quotient(),
        100.0 * (result.final_quotient() / result.target - 1.0),
        result.monotone,
        if passed { "pass" } else { "FAIL" }
    );
    let output = SharpnessOutput { config, passed, sweep: Some(result), minimum: None };
    write_output(&args.output, &output, || output.sweep.as_ref().unwrap().to_csv())?;
    Ok(passed)
}

pub fn search_counterexample(args: &SearchArgs) -> Outcome {
    Inequality::claimed(args.n, args.p)?;
    check_grid_n(args.grid_n)?;
    if args.iters == 0 {
        return config_error("--iters must be positive");
    }
    let mut spec = search_grid_spec();
    if let Some(g) = args.grid_n {
        spec.polar.nodes = g;
        spec.angular_nodes = g;
    }
    let mut config = RunConfig::new("search-counterexample", &args.output);
    config.kind = Some(InequalityKind::Claimed);
    config.n = Some(args.n);
    config.p = Some(args.p);
    config.grid_n = args.grid_n;
    config.iters = Some(args.iters);
    let grid = SphereGrid::new(args.n, spec)?;
    let result = counterexample_search(args.n, args.p, args.iters, args.output.seed, &grid)?;
    println!("baseline u = 1: deficit = {:.9}", result.baseline.deficit);
    println!(
        "{} iterations, min deficit/(A+B+C) = {:.6e} (deficit {:.6e})",
        result.iterations, result.min_relative_deficit, result.argmin_report.deficit
    );
    if result.candidate {
        println!("CANDIDATE COUNTEREXAMPLE: {}", serde_json::to_string(&result.argmin).unwrap_or_default());
    }
    let output = SearchOutput { config, result };
    write_output(&args.output, &output, || output.result.to_csv())?;
    Ok(true)
}

/// Runs a parsed command and maps the outcome to an exit code.
pub fn run(cli: &Cli) -> ExitCode {
    let outcome = match &cli.command {
        Command::VerifyIdentities(a) => verify_identities(a),
        Command::VerifyInequality(a) => verify_inequality(a),
        Command::Sharpness(a) => sharpness(a),
        Command::SearchCounterexample(a) => search_counterexample(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
    }
}
