//! gnuplot script emission. Each trace becomes two inline data blocks,
//! `$cwnd_N` and `$tput_N` (N from 1, in argument order), drawn in a
//! two-panel multiplot: cwnd over time on top, throughput below.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use lossdiff_core::trace::{TraceRecord, TRACE_CSV_HEADER};

use super::{create_dir, write_file};
use crate::CliError;

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Trace CSV written by `run` or `compare --traces`. Repeatable.
    #[arg(long = "trace", value_name = "PATH", required = true)]
    traces: Vec<PathBuf>,
    /// Series label, one per trace. Defaults to the controller named in a
    /// sibling summary.txt, then to the file name.
    #[arg(long = "label")]
    labels: Vec<String>,
    /// Receives plot.gp.
    #[arg(long, value_name = "DIR", default_value = "results")]
    out: PathBuf,
    /// Rows kept per series after downsampling.
    #[arg(long, default_value_t = 2000)]
    max_points: usize,
}

pub struct Series {
    pub label: String,
    pub records: Vec<TraceRecord>,
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRecord>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        None => {
            return Err(CliError::invalid(format!(
                "{}: empty trace",
                path.display()
            )))
        }
        Some(h) if h.trim_end() == TRACE_CSV_HEADER => {}
        Some(h) => {
            return Err(CliError::invalid(format!(
                "{}: expected header `{TRACE_CSV_HEADER}`, found `{h}`",
                path.display()
            )))
        }
    }
    let records = lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.parse::<TraceRecord>()
                .map_err(|e| CliError::invalid(format!("{}: line {}: {e}", path.display(), i + 2)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if records.is_empty() {
        return Err(CliError::invalid(format!(
            "{}: trace has no rows",
            path.display()
        )));
    }
    Ok(records)
}

fn default_label(path: &Path) -> String {
    let summary = path.with_file_name("summary.txt");
    if let Ok(text) = fs::read_to_string(summary) {
        if let Some(c) = text.lines().find_map(|l| l.strip_prefix("controller=")) {
            return c.trim().to_string();
        }
    }
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Every k-th record, plus the last one, so at most about `max` remain.
pub fn downsample(records: &[TraceRecord], max: usize) -> Vec<TraceRecord> {
    let max = max.max(2);
    if records.len() <= max {
        return records.to_vec();
    }
    let step = records.len().div_ceil(max - 1);
    let mut out: Vec<_> = records.iter().step_by(step).copied().collect();
    if let Some(last) = records.last() {
        if out.last() != Some(last) {
            out.push(*last);
        }
    }
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn write_script<W: Write>(
    mut w: W,
    series: &[Series],
    max_points: usize,
) -> std::io::Result<()> {
    writeln!(w, "# lossdiff plot script; run with `gnuplot -p plot.gp`")?;
    for (n, s) in series.iter().enumerate().map(|(i, s)| (i + 1, s)) {
        let rows = downsample(&s.records, max_points);
        writeln!(w, "$cwnd_{n} << EOD")?;
        for r in &rows {
            writeln!(w, "{} {}", r.time, r.cwnd)?;
        }
        writeln!(w, "EOD")?;
        writeln!(w, "$tput_{n} << EOD")?;
        for r in &rows {
            writeln!(w, "{} {}", r.time, r.throughput_bps)?;
        }
        writeln!(w, "EOD")?;
    }
    let plot = |w: &mut W, block: &str, style: &str| -> std::io::Result<()> {
        let items: Vec<String> = series
            .iter()
            .enumerate()
            .map(|(i, s)| {
                format!(
                    "${block}_{} using 1:2 with {style} title {}",
                    i + 1,
                    quote(&s.label)
                )
            })
            .collect();
        writeln!(w, "plot {}", items.join(", \\\n     "))
    };
    writeln!(w, "set multiplot layout 2,1")?;
    writeln!(w, "set xlabel \"time (s)\"")?;
    writeln!(w, "set ylabel \"cwnd (bytes)\"")?;
    writeln!(w, "set title \"Congestion window\"")?;
    plot(&mut w, "cwnd", "steps")?;
    writeln!(w, "set ylabel \"throughput (bit/s)\"")?;
    writeln!(w, "set title \"Throughput, trailing 1 s\"")?;
    plot(&mut w, "tput", "lines")?;
    writeln!(w, "unset multiplot")?;
    Ok(())
}

pub fn run(args: &PlotArgs) -> Result<(), CliError> {
    if !args.labels.is_empty() && args.labels.len() != args.traces.len() {
        return Err(CliError::invalid(format!(
            "{} labels for {} traces",
            args.labels.len(),
            args.traces.len()
        )));
    }
    let mut series = Vec::with_capacity(args.traces.len());
    for (i, path) in args.traces.iter().enumerate() {
        series.push(Series {
            label: args
                .labels
                .get(i)
                .cloned()
                .unwrap_or_else(|| default_label(path)),
            records: read_trace(path)?,
        });
    }
    create_dir(&args.out)?;
    write_file(&args.out.join("plot.gp"), |w| {
        write_script(w, &series, args.max_points)
    })
}
