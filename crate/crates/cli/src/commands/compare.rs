use std::io::Write;
use std::path::PathBuf;
use std::thread;

use clap::Args;
use lossdiff_core::netsim::{run_scenario_with, ControllerKind, RunOptions, RunResult};
use lossdiff_core::trace::write_trace_csv;

use super::{create_dir, write_file};
use crate::{CliError, ComparisonReport, ScenarioArgs};

pub const COMPARE_CSV_HEADER: &str =
    "loss_rate,controller,goodput_pps,mean_cwnd_bytes,min_cwnd_bytes,halvings,retransmissions";

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Error-loss rates as fractions, e.g. `0,0.01,0.05`. Defaults to the
    /// scenario's own rate. `--controller` is ignored.
    #[arg(long, value_name = "R1,R2,...")]
    sweep: Option<String>,
    /// Also write trace_<rate>_<controller>.csv for every run.
    #[arg(long)]
    traces: bool,
    #[arg(long, value_name = "DIR", default_value = "results")]
    out: PathBuf,
}

pub fn parse_sweep(s: &str) -> Result<Vec<f64>, CliError> {
    let rates = s
        .split(',')
        .map(|r| {
            let r = r.trim();
            r.parse::<f64>()
                .ok()
                .filter(|v| (0.0..=1.0).contains(v))
                .ok_or_else(|| CliError::invalid(format!("sweep rate `{r}` is not in [0, 1]")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(rates)
}

pub fn run(args: &CompareArgs) -> Result<(), CliError> {
    let base = args.scenario.load()?;
    let rates = match &args.sweep {
        Some(s) => parse_sweep(s)?,
        None => vec![base.link_ri_r.error_loss_rate],
    };
    let opts = RunOptions {
        record_trace: args.traces,
        record_transmissions: false,
    };

    let results: Vec<Result<RunResult, String>> = thread::scope(|scope| {
        let handles: Vec<_> = rates
            .iter()
            .flat_map(|&rate| [(rate, ControllerKind::Rfc793), (rate, ControllerKind::Snr)])
            .map(|(rate, controller)| {
                let cfg = base
                    .clone()
                    .with_error_loss_rate(rate)
                    .with_controller(controller);
                scope.spawn(move || run_scenario_with(&cfg, opts).map_err(|e| e.to_string()))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err("simulation panicked".into()))
            })
            .collect()
    });

    let mut runs = results.into_iter();
    let mut reports = Vec::with_capacity(rates.len());
    for &loss_rate in &rates {
        let mut next = || {
            runs.next()
                .expect("two runs per rate")
                .map_err(CliError::invalid)
        };
        let rfc793 = next()?;
        let snr = next()?;
        reports.push(ComparisonReport {
            loss_rate,
            seed: base.seed,
            rfc793,
            snr,
        });
    }

    create_dir(&args.out)?;
    write_file(&args.out.join("compare.csv"), |w| {
        write_compare_csv(w, &reports)
    })?;
    write_file(&args.out.join("report.txt"), |w| {
        for r in &reports {
            write!(w, "{r}")?;
        }
        Ok(())
    })?;
    if args.traces {
        for report in &reports {
            for r in report.runs() {
                let name = format!("trace_{}_{}.csv", report.loss_rate, r.controller);
                write_file(&args.out.join(name), |w| write_trace_csv(w, &r.trace))?;
            }
        }
    }
    Ok(())
}

/// `mean_cwnd_bytes` and `min_cwnd_bytes` exclude the initial growth phase.
pub fn write_compare_csv<W: Write>(mut w: W, reports: &[ComparisonReport]) -> std::io::Result<()> {
    writeln!(w, "{COMPARE_CSV_HEADER}")?;
    for report in reports {
        for r in report.runs() {
            writeln!(
                w,
                "{},{},{:.3},{:.1},{},{},{}",
                report.loss_rate,
                r.controller,
                r.goodput_pps,
                r.cwnd.mean,
                r.cwnd.min,
                r.totals.halvings,
                r.totals.retransmissions
            )?;
        }
    }
    Ok(())
}
