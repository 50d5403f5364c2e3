//! `kdqi`: deterministic experiment driver for the interferometry toolkit.
//!
//! Every subcommand resolves its parameters as flag > config-file > default,
//! stamps a provenance header (config hash, master seed, seed-splitting
//! rule, version) on the artifact, and emits CSV or JSON. Reruns with the
//! same config and seed produce byte-identical output at any thread count:
//! all parallel work draws per-task seeds split from the master seed and is
//! reduced in task order.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Resolver;
use output::{emit, Format, Provenance};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config: exit code 1.
    Usage(String),
    /// Failure while running a valid configuration: exit code 2.
    Runtime(String),
}

impl From<kdqi::Error> for CliError {
    fn from(e: kdqi::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "kdqi", version, about = "interference head-mass experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Flat key=value config file; flags override its entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; per-task seeds are split from it
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path, or - for stdout
    #[arg(long, global = true)]
    out: Option<String>,
    /// Output format: csv or json
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Worker threads (fallback: env KDQI_THREADS, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scan chirp rate against noise-weighted head mass on one instance
    OpiScan(commands::OpiScanArgs),
    /// Density-evolution map, derivative, and shifted-map family
    DeMap(commands::DeMapArgs),
    /// Erasure thresholds per ensemble by bisection
    DeThreshold(commands::DeThresholdArgs),
    /// Finite-length frame-error-rate scan with Wilson intervals
    BpFer(commands::BpFerArgs),
    /// Two-parameter objective landscape plus an optimizer trajectory
    Landscape(commands::LandscapeArgs),
    /// Head-mass report for one instance, kernel, and noise model
    Headmass(commands::HeadmassArgs),
    /// Response-versus-head-mass monotonicity audit
    AuditMonotone(commands::AuditArgs),
    /// Head-mass gain versus relative depth for the reference kernels
    CostFrontier(commands::CostFrontierArgs),
    /// Model depth over an index-size grid with fitted log-log slopes
    CostScaling(commands::CostScalingArgs),
    /// Fast invariant battery; exits nonzero on any failure
    Selftest,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders help/version through the same error path
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file_config = match &cli.config {
        Some(path) => config::load_config(path)?,
        None => Default::default(),
    };
    let mut resolver = Resolver::new(file_config);
    let seed = resolver.get("seed", cli.seed, 42)?;
    let out = resolver.get_untracked("out", cli.out.clone(), "-".to_string())?;
    let format = resolver.get_untracked("format", cli.format, Format::Csv)?;
    let threads = match resolver.get_opt_untracked("threads", cli.threads)? {
        Some(t) => Some(t),
        None => match std::env::var("KDQI_THREADS") {
            Ok(raw) => Some(raw.parse::<usize>().map_err(|_| {
                CliError::Usage(format!("KDQI_THREADS: cannot parse {raw:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    let (command, table, failures) = match &cli.cmd {
        Cmd::OpiScan(args) => ("opi-scan", commands::opi_scan(args, &mut resolver, seed)?, 0),
        Cmd::DeMap(args) => ("de-map", commands::de_map(args, &mut resolver)?, 0),
        Cmd::DeThreshold(args) => {
            ("de-threshold", commands::de_threshold(args, &mut resolver)?, 0)
        }
        Cmd::BpFer(args) => ("bp-fer", commands::bp_fer(args, &mut resolver, seed)?, 0),
        Cmd::Landscape(args) => ("landscape", commands::landscape(args, &mut resolver, seed)?, 0),
        Cmd::Headmass(args) => ("headmass", commands::headmass(args, &mut resolver, seed)?, 0),
        Cmd::AuditMonotone(args) => {
            ("audit-monotone", commands::audit_monotone(args, &mut resolver, seed)?, 0)
        }
        Cmd::CostFrontier(args) => {
            ("cost-frontier", commands::cost_frontier(args, &mut resolver)?, 0)
        }
        Cmd::CostScaling(args) => {
            ("cost-scaling", commands::cost_scaling(args, &mut resolver)?, 0)
        }
        Cmd::Selftest => {
            let (table, failures) = commands::selftest(seed)?;
            ("selftest", table, failures)
        }
    };
    resolver.reject_unknown()?;
    let prov = Provenance {
        command: command.to_string(),
        config_hash: resolver.config_hash(command),
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    emit(&out, &table.render(format, &prov))?;
    if failures > 0 {
        return Err(CliError::Runtime(format!("selftest: {failures} check(s) failed")));
    }
    Ok(())
}
