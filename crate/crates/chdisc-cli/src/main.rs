//! `chdisc` — discrimination of quantum channels under causally structured
//! strategies, from the command line.
//!
//! Five subcommands drive the library:
//!
//! * `discriminate` — solve the SDP for each requested strategy class and
//!   report the float values with solver residuals;
//! * `certify` — turn solver output into exact certificates, one JSON file
//!   per strategy and bound direction, and optionally assert the strict
//!   hierarchy between consecutive classes (`--assert-hierarchy` exits
//!   nonzero unless each certified upper bound lies strictly below the next
//!   class's certified lower bound);
//! * `hierarchy-scan` — census over seeded random channel pairs: how often
//!   each consecutive separation (and the full hierarchy) is strict;
//! * `sweep` — amplitude-damping parameter sweep against a fixed bit flip;
//! * `verify` — re-check previously written certificate files in exact
//!   arithmetic.
//!
//! Every output begins with a `#`-prefixed JSON header carrying the full
//! run configuration and artifact version, and all rows are emitted in
//! deterministic index order, so identical configurations produce
//! byte-identical output. Censuses and sweeps parallelize across rows
//! (honoring `RAYON_NUM_THREADS`); per-row progress goes to stderr under
//! `RUST_LOG=info`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use chdisc::certify::{Certificate, CertifiedInterval, CertifyError, certify_interval};
use chdisc::channels::{Channel, ChannelError, ChannelSpec, Ensemble};
use chdisc::exact::{ExactError, Rational, rational_from_str, rational_to_string};
use chdisc::scan::{gamma_sweep, grid_point_to_f64, hierarchy_census, summarize};
use chdisc::sdp::{SdpError, SolverConfig, discriminate};
use chdisc::strategies::{Strategy, StrategyError};

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("hierarchy assertion failed: {0}")]
    Hierarchy(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Parser)]
#[command(
    name = "chdisc",
    version,
    about = "Channel discrimination under parallel, sequential, causally \
             separable, and general strategies, with exact certification."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the discrimination SDP and print float values with residuals.
    Discriminate(DiscriminateArgs),
    /// Write exact bound certificates; optionally assert the strict hierarchy.
    Certify(CertifyArgs),
    /// Census over random channel pairs: how often the hierarchy is strict.
    HierarchyScan(ScanArgs),
    /// Sweep the amplitude-damping parameter against a fixed bit flip.
    Sweep(SweepArgs),
    /// Re-verify certificate files written by `certify`.
    Verify(VerifyArgs),
}

/// Channel/prior/copies flags shared by `discriminate` and `certify`.
#[derive(Args)]
struct EnsembleArgs {
    /// Channel specs, comma separated (`ad:0.67,bf:0.87`) or one per flag.
    /// Families: `ad:<gamma>`, `bf:<eta>`, `random:seed=<s>`,
    /// `random:seed=<s>,pair=<p>,member=<0|1>`.
    #[arg(long, required = true)]
    channels: Vec<String>,
    /// Priors as rationals or decimals (`0.5,0.5`); default is uniform.
    #[arg(long)]
    priors: Option<String>,
    /// Uses of the unknown channel per hypothesis (1 or 2).
    #[arg(long, default_value_t = 2)]
    copies: usize,
}

/// Interior-point solver settings shared by every solving subcommand.
#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    /// Relative duality-gap tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol_gap: f64,
    /// Primal/dual feasibility tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol_feas: f64,
}

impl SolverArgs {
    fn to_config(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.max_iterations,
            tol_gap: self.tol_gap,
            tol_feas: self.tol_feas,
        }
    }
}

const DEFAULT_STRATEGIES: &str = "par,seq12,sep,gen";

#[derive(Args)]
struct DiscriminateArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// Strategy classes to solve, comma separated.
    #[arg(long, default_value = DEFAULT_STRATEGIES)]
    strategies: String,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// Strategy classes to certify, comma separated.
    #[arg(long, default_value = DEFAULT_STRATEGIES)]
    strategies: String,
    #[command(flatten)]
    solver: SolverArgs,
    /// Directory receiving one JSON certificate per (strategy, direction).
    #[arg(long, default_value = "certificates")]
    out_dir: PathBuf,
    /// Exit nonzero unless every certified upper bound is strictly below
    /// the next class's certified lower bound (requires all four classes).
    #[arg(long)]
    assert_hierarchy: bool,
}

#[derive(Args)]
struct ScanArgs {
    /// Number of sampled channel pairs.
    #[arg(long, default_value_t = 100)]
    samples: u64,
    /// Master seed; pair `i` always draws from RNG stream `i`.
    #[arg(long, default_value_t = 2026)]
    seed: u64,
    /// A consecutive gap counts as a separation when it exceeds this.
    #[arg(long, default_value_t = 1e-6)]
    threshold: f64,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Amplitude-damping grid, comma separated; default is 0, 1/20, …, 1.
    #[arg(long)]
    grid: Option<String>,
    /// Fixed bit-flip parameter.
    #[arg(long, default_value = "0.87")]
    eta: String,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Certificate files to re-verify.
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

/// The full configuration of one run, embedded verbatim (as one JSON line
/// behind a `#`) in every output so results stay reproducible. Channel and
/// prior strings are canonicalized first, so spellings like `ad:0.67` and
/// `ad:67/100` produce the same header.
#[derive(Serialize)]
struct RunConfig {
    artifact: &'static str,
    version: &'static str,
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    channels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    priors: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    copies: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strategies: Option<Vec<String>>,
    max_iterations: usize,
    tol_gap: f64,
    tol_feas: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
}

impl RunConfig {
    fn new(command: &'static str, solver: &SolverArgs) -> Self {
        RunConfig {
            artifact: "chdisc",
            version: env!("CARGO_PKG_VERSION"),
            command,
            channels: None,
            priors: None,
            copies: None,
            strategies: None,
            max_iterations: solver.max_iterations,
            tol_gap: solver.tol_gap,
            tol_feas: solver.tol_feas,
            seed: None,
            samples: None,
            threshold: None,
            eta: None,
            grid: None,
            output: None,
        }
    }

    fn with_ensemble(mut self, ensemble: &Ensemble) -> Self {
        self.channels = Some(
            ensemble
                .items()
                .iter()
                .map(|(_, c)| c.spec().to_string())
                .collect(),
        );
        self.priors = Some(
            ensemble
                .items()
                .iter()
                .map(|(p, _)| rational_to_string(p))
                .collect(),
        );
        self.copies = Some(ensemble.copies());
        self
    }

    fn with_strategies(mut self, strategies: &[Strategy]) -> Self {
        self.strategies = Some(strategies.iter().map(Strategy::to_string).collect());
        self
    }

    fn with_output(mut self, path: Option<&PathBuf>) -> Self {
        self.output = path.map(|p| p.display().to_string());
        self
    }

    fn to_json(&self) -> String {
        serde_json::to_string(self).expect("run configuration serializes")
    }

    fn header(&self) -> String {
        format!("# {}", self.to_json())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Discriminate(args) => cmd_discriminate(args),
        Command::Certify(args) => cmd_certify(args),
        Command::HierarchyScan(args) => cmd_hierarchy_scan(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

// ---------------------------------------------------------------------------
// Argument parsing helpers
// ---------------------------------------------------------------------------

/// Flattens `--channels` occurrences into individual spec strings. Splitting
/// happens on commas, but a piece that does not start a new spec is glued
/// back onto its predecessor, so `random:seed=1,pair=2,member=0` survives as
/// one spec while `ad:0.67,bf:0.87` splits into two.
fn split_channel_list(raw: &[String]) -> Vec<String> {
    let starts_spec = |piece: &str| {
        ["ad:", "bf:", "random:"]
            .iter()
            .any(|p| piece.starts_with(p))
    };
    let mut specs: Vec<String> = Vec::new();
    for arg in raw {
        for piece in arg.split(',') {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            match specs.last_mut() {
                Some(last) if !starts_spec(piece) => {
                    last.push(',');
                    last.push_str(piece);
                }
                _ => specs.push(piece.to_string()),
            }
        }
    }
    specs
}

fn build_ensemble(args: &EnsembleArgs) -> Result<Ensemble, CliError> {
    let specs = split_channel_list(&args.channels);
    if specs.is_empty() {
        return Err(usage("at least two channel specs are required"));
    }
    let channels = specs
        .iter()
        .map(|s| Channel::from_spec(&ChannelSpec::from_str(s)?))
        .collect::<Result<Vec<_>, _>>()?;
    let priors: Vec<Rational> = match &args.priors {
        Some(list) => list
            .split(',')
            .map(|p| rational_from_str(p.trim()))
            .collect::<Result<_, _>>()?,
        None => {
            let uniform = rational_from_str(&format!("1/{}", channels.len()))?;
            vec![uniform; channels.len()]
        }
    };
    if priors.len() != channels.len() {
        return Err(usage(format!(
            "{} priors given for {} channels",
            priors.len(),
            channels.len()
        )));
    }
    Ok(Ensemble::new(
        args.copies,
        priors.into_iter().zip(channels).collect(),
    )?)
}

fn parse_strategies(list: &str) -> Result<Vec<Strategy>, CliError> {
    let strategies = list
        .split(',')
        .map(|s| Strategy::from_str(s.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if strategies.is_empty() {
        return Err(usage("at least one strategy is required"));
    }
    Ok(strategies)
}

fn parse_grid(args: &SweepArgs) -> Result<Vec<Rational>, CliError> {
    match &args.grid {
        Some(list) => Ok(list
            .split(',')
            .map(|g| rational_from_str(g.trim()))
            .collect::<Result<_, _>>()?),
        None => (0..=20)
            .map(|k| Ok(rational_from_str(&format!("{k}/20"))?))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

/// Prints to stdout or writes the file, depending on `--out`.
fn emit(path: Option<&PathBuf>, lines: &[String]) -> Result<(), CliError> {
    let content = lines.join("\n") + "\n";
    match path {
        Some(p) => {
            fs::write(p, content).map_err(|e| io_error(p, e))?;
            log::info!("wrote {}", p.display());
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn four_values(prefix: &str, v: &chdisc::scan::HierarchyValues) -> String {
    format!(
        "{prefix},{:.9},{:.9},{:.9},{:.9}",
        v.par, v.seq, v.sep, v.general
    )
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_discriminate(args: DiscriminateArgs) -> Result<(), CliError> {
    let ensemble = build_ensemble(&args.ensemble)?;
    let strategies = parse_strategies(&args.strategies)?;
    let config = args.solver.to_config();
    let run = RunConfig::new("discriminate", &args.solver)
        .with_ensemble(&ensemble)
        .with_strategies(&strategies)
        .with_output(args.out.as_ref());

    let mut lines = vec![
        run.header(),
        "strategy,value,dual_value,relative_gap,primal_infeasibility,dual_infeasibility,iterations"
            .to_string(),
    ];
    for strategy in strategies {
        let d = discriminate(&ensemble, strategy, &config)?;
        lines.push(format!(
            "{strategy},{:.9},{:.9},{:.3e},{:.3e},{:.3e},{}",
            d.value,
            d.dual_value,
            d.relative_gap,
            d.primal_infeasibility,
            d.dual_infeasibility,
            d.iterations
        ));
    }
    emit(args.out.as_ref(), &lines)
}

fn cmd_certify(args: CertifyArgs) -> Result<(), CliError> {
    let ensemble = build_ensemble(&args.ensemble)?;
    let strategies = parse_strategies(&args.strategies)?;
    let config = args.solver.to_config();
    let run = RunConfig::new("certify", &args.solver)
        .with_ensemble(&ensemble)
        .with_strategies(&strategies)
        .with_output(Some(&args.out_dir));
    fs::create_dir_all(&args.out_dir).map_err(|e| io_error(&args.out_dir, e))?;

    let mut lines = vec![run.header()];
    let mut intervals: Vec<CertifiedInterval> = Vec::new();
    for &strategy in &strategies {
        let interval = certify_interval(&ensemble, strategy, &config)?;
        lines.push(format!("{strategy} value {:.9}", interval.float_value));
        for (direction, certificate) in [("lower", &interval.lower), ("upper", &interval.upper)] {
            let path = args
                .out_dir
                .join(format!("cert-{strategy}-{direction}.json"));
            let body = format!(
                "{{\"run\":{},\"certificate\":{}}}\n",
                run.to_json(),
                certificate.to_json()?
            );
            fs::write(&path, body).map_err(|e| io_error(&path, e))?;
            lines.push(format!(
                "{strategy} {direction} {:.9} = {} -> {}",
                certificate.bound.to_f64(),
                certificate.bound,
                path.display()
            ));
        }
        intervals.push(interval);
    }

    let assertion = if args.assert_hierarchy {
        Some(check_hierarchy(&intervals, &mut lines))
    } else {
        None
    };
    emit(None, &lines)?;
    assertion.unwrap_or(Ok(()))
}

/// Requires all four hierarchy classes and checks that each certified upper
/// bound sits strictly below the next class's certified lower bound —
/// comparisons happen on the exact bounds, not their float shadows.
fn check_hierarchy(
    intervals: &[CertifiedInterval],
    lines: &mut Vec<String>,
) -> Result<(), CliError> {
    let chain = Strategy::HIERARCHY
        .iter()
        .map(|s| {
            intervals
                .iter()
                .find(|i| i.strategy == *s)
                .ok_or_else(|| usage(format!("--assert-hierarchy needs strategy {s}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for pair in chain.windows(2) {
        let (below, above) = (pair[0], pair[1]);
        if !(below.upper.bound < above.lower.bound) {
            let message = format!(
                "{} upper bound {:.9} is not strictly below {} lower bound {:.9}",
                below.strategy,
                below.upper.bound.to_f64(),
                above.strategy,
                above.lower.bound.to_f64()
            );
            lines.push(format!("hierarchy NOT certified: {message}"));
            return Err(CliError::Hierarchy(message));
        }
    }
    lines.push("hierarchy certified strict: par < seq12 < sep < gen".to_string());
    Ok(())
}

fn cmd_hierarchy_scan(args: ScanArgs) -> Result<(), CliError> {
    let config = args.solver.to_config();
    let mut run = RunConfig::new("hierarchy-scan", &args.solver).with_output(args.out.as_ref());
    run.seed = Some(args.seed);
    run.samples = Some(args.samples);
    run.threshold = Some(args.threshold);

    let rows = hierarchy_census(args.samples, args.seed, &config)?;
    let summary = summarize(&rows, args.threshold);
    let mut lines = vec![run.header(), "pair,par,seq,sep,gen".to_string()];
    for row in &rows {
        lines.push(four_values(&row.pair.to_string(), &row.values));
    }
    lines.push(format!("# summary threshold {:e}", args.threshold));
    lines.push(format!(
        "# par<seq {}/{}",
        summary.par_lt_seq, summary.samples
    ));
    lines.push(format!(
        "# seq<sep {}/{}",
        summary.seq_lt_sep, summary.samples
    ));
    lines.push(format!(
        "# sep<gen {}/{}",
        summary.sep_lt_gen, summary.samples
    ));
    lines.push(format!(
        "# full-hierarchy {}/{}",
        summary.full_hierarchy, summary.samples
    ));
    emit(args.out.as_ref(), &lines)
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let grid = parse_grid(&args)?;
    let eta = rational_from_str(&args.eta)?;
    let config = args.solver.to_config();
    let mut run = RunConfig::new("sweep", &args.solver).with_output(args.out.as_ref());
    run.eta = Some(rational_to_string(&eta));
    run.grid = Some(grid.iter().map(rational_to_string).collect());

    let rows = gamma_sweep(&grid, &eta, &config)?;
    let mut lines = vec![run.header(), "gamma,par,seq,sep,gen".to_string()];
    for row in &rows {
        lines.push(four_values(
            &grid_point_to_f64(&row.gamma).to_string(),
            &row.values,
        ));
    }
    emit(args.out.as_ref(), &lines)
}

/// Accepts both the CLI's `{"run":…,"certificate":…}` envelope and a bare
/// certificate object, returning the certificate JSON.
fn extract_certificate(text: &str) -> Result<String, CliError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let inner = match value.get("certificate") {
        Some(c) => c,
        None => &value,
    };
    Ok(serde_json::to_string(inner)?)
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let mut lines = Vec::new();
    let mut failures = 0usize;
    for path in &args.files {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let certificate = Certificate::from_json(&extract_certificate(&text)?)?;
        let checks = certificate.verify()?;
        lines.push(format!("file {}", path.display()));
        lines.push(format!(
            "  {} {} bound {:.9} = {} on {}",
            certificate.strategy,
            certificate.direction,
            certificate.bound.to_f64(),
            certificate.bound,
            certificate.ensemble.describe()
        ));
        for check in &checks {
            let mark = if check.ok { "ok  " } else { "FAIL" };
            lines.push(format!("  {mark} {}", check.name));
        }
        failures += checks.iter().filter(|c| !c.ok).count();
    }
    emit(None, &lines)?;
    if failures > 0 {
        return Err(CliError::Verification(format!(
            "{failures} check(s) failed"
        )));
    }
    Ok(())
}
