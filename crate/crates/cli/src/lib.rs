//! `lossdiff` command-line front end.
//!
//! Exit codes: 0 on success, 1 for invalid flags, scenarios or input
//! content, 2 for file-system errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lossdiff_core::netsim::{ControllerKind, ScenarioConfig};

mod commands;
pub mod error;
pub mod report;
pub mod scenario;

pub use error::CliError;
pub use report::ComparisonReport;
pub use scenario::{parse_scenario, ScenarioError};

/// Environment variable overriding the scenario file's seed.
pub const SEED_ENV: &str = "LOSSDIFF_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "lossdiff",
    version,
    about = "TCP loss-differentiation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario and write its trace and summary.
    Run(commands::run::RunArgs),
    /// Run both controllers on identical seeds over a loss-rate sweep.
    Compare(commands::compare::CompareArgs),
    /// Apply the Veno, Westwood and JTCP estimators to a packet log.
    Analyze(commands::analyze::AnalyzeArgs),
    /// Emit a gnuplot script drawing cwnd and throughput over time.
    Plot(commands::plot::PlotArgs),
}

/// Flags shared by the simulating subcommands.
#[derive(Debug, Args)]
pub(crate) struct ScenarioArgs {
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
    /// Overrides both the file and the environment.
    #[arg(long)]
    seed: Option<u64>,
    /// rfc793 or snr.
    #[arg(long, value_name = "NAME")]
    controller: Option<String>,
    /// Simulated seconds.
    #[arg(long, value_name = "S")]
    duration: Option<f64>,
}

impl ScenarioArgs {
    pub(crate) fn load(&self) -> Result<ScenarioConfig, CliError> {
        let mut cfg = load_scenario(&self.scenario)?;
        let env = std::env::var(SEED_ENV).ok();
        cfg.seed = resolve_seed(self.seed, env.as_deref(), cfg.seed)?;
        if let Some(name) = &self.controller {
            cfg.controller = ControllerKind::parse(name)
                .ok_or_else(|| CliError::invalid(format!("unknown controller `{name}`")))?;
        }
        if let Some(d) = self.duration {
            cfg.duration_s = d;
        }
        cfg.validate()
            .map_err(|e| CliError::invalid(format!("{}: {e}", self.scenario.display())))?;
        Ok(cfg)
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenario(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

/// Flag, then environment, then file.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>, file: u64) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match env.map(str::trim).filter(|s| !s.is_empty()) {
        Some(s) => s
            .parse()
            .map_err(|_| CliError::invalid(format!("{SEED_ENV}=`{s}` is not a seed"))),
        None => Ok(file),
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => commands::run::run(&a),
        Command::Compare(a) => commands::compare::run(&a),
        Command::Analyze(a) => commands::analyze::run(&a),
        Command::Plot(a) => commands::plot::run(&a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lossdiff: {e}");
            e.exit_code()
        }
    }
}
