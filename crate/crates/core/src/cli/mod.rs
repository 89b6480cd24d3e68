//! Experiment orchestration: TOML configs in, JSON reports and CSV tables
//! out, and the `fingap` command line on top.

mod config;
mod report;
mod run;

pub use config::{ExperimentConfig, ExperimentKind, Knobs, OperatorSpec, OutputSpec, Tolerances};
pub use report::{Check, Outcome, Report, Status, Table, EXIT_CONFIG, EXIT_IO};
pub use run::{run, JOST_STEPS};

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "FINGAP_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "fingap",
    version,
    about = "Finite-gap Jacobi matrix experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment config (TOML); without one a built-in example runs.
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the report and tables [default: the config's, else
    /// `fingap-out`].
    #[arg(short, long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the experiment kinds, or summarize and validate a config.
    Info,
    /// Equilibrium measure, capacity and Green function.
    Equilibrium,
    /// Fit the Fuchsian group and check the covering map.
    Cover,
    /// Szegő conditions of an operator.
    Szego,
    /// Step-by-step sum rule for a finite-rank perturbation.
    Sumrule,
    /// Polynomial ratio asymptotics and Jost solutions.
    Asymptotics,
    /// Characters and torus matching.
    Character,
    /// Decay of the limit-set covers and Burnside sums.
    Beardon,
}

impl Command {
    fn kind(&self) -> Option<ExperimentKind> {
        Some(match self {
            Command::Info => return None,
            Command::Equilibrium => ExperimentKind::Equilibrium,
            Command::Cover => ExperimentKind::CoveringFit,
            Command::Szego => ExperimentKind::SzegoReport,
            Command::Sumrule => ExperimentKind::SumRule,
            Command::Asymptotics => ExperimentKind::Asymptotics,
            Command::Character => ExperimentKind::CharacterMatch,
            Command::Beardon => ExperimentKind::BeardonDecay,
        })
    }
}

/// Parses the command line, runs, and returns the exit status.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.common.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).init();
    ExitCode::from(execute(&cli))
}

/// Runs a parsed command line; returns the exit status.
pub fn execute(cli: &Cli) -> u8 {
    let cfg = match load(&cli.common, cli.command.kind()) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("fingap: {msg}");
            return EXIT_CONFIG;
        }
    };
    let Some(cfg) = cfg else {
        println!("fingap {}", env!("CARGO_PKG_VERSION"));
        println!("experiment kinds:");
        for k in ExperimentKind::ALL {
            println!("  {}", k.name());
        }
        return 0;
    };
    if matches!(cli.command, Command::Info) {
        print_summary(&cfg);
        return 0;
    }
    let out = cli
        .common
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("fingap-out"));
    let outcome = run(&cfg);
    match outcome.write(&out) {
        Ok(paths) => {
            for p in paths {
                log::info!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("fingap: cannot write to {}: {e}", out.display());
            return EXIT_IO;
        }
    }
    let r = &outcome.report;
    for c in &r.checks {
        println!(
            "{:<6} {:<28} {:.3e} ({} {:.1e})",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.value,
            c.sense,
            c.tolerance
        );
    }
    if let Some(e) = &r.error {
        println!("error  {e}");
    }
    println!("{}: {:?} in {:.2}s", r.kind, r.status, r.runtime_seconds);
    r.status.exit_code()
}

fn load(common: &Common, kind: Option<ExperimentKind>) -> Result<Option<ExperimentConfig>, String> {
    let mut cfg = match (&common.config, kind) {
        (Some(p), _) => ExperimentConfig::load(p).map_err(|e| e.to_string())?,
        (None, Some(k)) => ExperimentConfig::example(k),
        (None, None) => return Ok(None),
    };
    if let Some(k) = kind {
        if cfg.kind != k {
            return Err(format!(
                "config describes a {} experiment, not {}",
                cfg.kind.name(),
                k.name()
            ));
        }
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(Some(cfg))
}

fn print_summary(cfg: &ExperimentConfig) {
    println!("kind        {}", cfg.kind.name());
    println!("endpoints   {:?}", cfg.endpoints);
    if let Ok(set) = cfg.gapset() {
        println!("gaps        {}", set.gap_count());
    }
    if let Some(op) = &cfg.operator {
        println!("tail        {:?}", op.tail);
        println!("head        {} override(s)", op.head.len());
    }
    println!("seed        {}", cfg.seed);
    println!("config hash {}", cfg.hash());
}
