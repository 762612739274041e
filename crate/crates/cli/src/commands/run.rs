use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use lossdiff_core::netsim::{run_scenario_with, RunOptions};
use lossdiff_core::trace::{write_trace_csv, write_transmissions_csv};

use super::{create_dir, write_file};
use crate::report::run_summary;
use crate::{CliError, ScenarioArgs};

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Receives trace.csv, packets.csv and summary.txt.
    #[arg(long, value_name = "DIR", default_value = "results")]
    out: PathBuf,
}

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let cfg = args.scenario.load()?;
    let result = run_scenario_with(&cfg, RunOptions::default())
        .map_err(|e| CliError::invalid(e.to_string()))?;

    create_dir(&args.out)?;
    write_file(&args.out.join("trace.csv"), |w| {
        write_trace_csv(w, &result.trace)
    })?;
    write_file(&args.out.join("packets.csv"), |w| {
        write_transmissions_csv(w, &result.transmissions)
    })?;
    write_file(&args.out.join("summary.txt"), |w| {
        w.write_all(run_summary(&cfg, &result).as_bytes())
    })?;
    Ok(())
}
