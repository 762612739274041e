//! Offline estimator pass over a packet log (`packets.csv` from `run`).
//!
//! * A loss event is a row with no receive time. Veno classifies it from
//!   the backlog at its send time: the base RTT is the smallest RTT in the
//!   log, the actual RTT is the latest sample acknowledged by then (the
//!   first sample if none is), and the window is the number of segments
//!   whose latest copy is still unacknowledged.
//! * Westwood samples come from ACK times; ACKs sharing a timestamp count
//!   as one ACK covering their summed size.
//! * JTCP jitter is taken over consecutive delivered rows in send order.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use lossdiff_core::estimators::{
    jtcp_jitter, vegas_backlog, veno_classify, westwood_sbw, JitterPair, LossClass, VegasSample,
    WestwoodEstimator, WestwoodSample,
};
use serde::Deserialize;

use super::{create_dir, write_file};
use crate::{load_scenario, CliError};

pub const DEFAULT_THRES: f64 = 3.0;

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// CSV with columns seq,send_time,recv_time,ack_time,size.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Veno backlog threshold in segments.
    #[arg(long, default_value_t = DEFAULT_THRES)]
    thres: f64,
    /// Westwood filter factor. Falls back to the scenario's `westwood_t`.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
    /// Receives veno.csv, westwood.csv and jtcp.csv.
    #[arg(long, value_name = "DIR", default_value = "results")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct PacketRow {
    pub seq: u64,
    pub send_time: f64,
    pub recv_time: Option<f64>,
    pub ack_time: Option<f64>,
    pub size: u32,
}

impl PacketRow {
    fn rtt(&self) -> Option<f64> {
        self.ack_time.map(|a| a - self.send_time)
    }

    fn check(&self) -> Result<(), String> {
        let finite = |v: f64| v.is_finite() && v >= 0.0;
        if !finite(self.send_time) {
            return Err("send_time must be a non-negative number".into());
        }
        match (self.recv_time, self.ack_time) {
            (None, Some(_)) => Err("ack_time without recv_time".into()),
            (Some(r), _) if !finite(r) || r < self.send_time => {
                Err("recv_time precedes send_time".into())
            }
            (Some(r), Some(a)) if !finite(a) || a < r => Err("ack_time precedes recv_time".into()),
            _ => Ok(()),
        }
    }
}

pub fn read_packets(path: &Path) -> Result<Vec<PacketRow>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<PacketRow>().enumerate() {
        let row_no = i + 1;
        let bad =
            |msg: String| CliError::invalid(format!("{}: row {row_no}: {msg}", path.display()));
        let row = match rec {
            Ok(row) => row,
            Err(e) if e.is_io_error() => {
                let csv::ErrorKind::Io(source) = e.into_kind() else {
                    unreachable!()
                };
                return Err(CliError::io(path, source));
            }
            Err(e) => return Err(bad(e.to_string())),
        };
        row.check().map_err(bad)?;
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VenoEvent {
    pub seq: u64,
    pub send_time: f64,
    pub cwnd_segments: u64,
    pub base_rtt: f64,
    pub actual_rtt: f64,
    pub n: f64,
    pub class: LossClass,
}

pub fn veno_events(rows: &[PacketRow], thres: f64) -> Vec<VenoEvent> {
    let Some(base_rtt) = rows
        .iter()
        .filter_map(PacketRow::rtt)
        .min_by(f64::total_cmp)
    else {
        return Vec::new();
    };
    let first_rtt = rows
        .iter()
        .filter(|r| r.ack_time.is_some())
        .min_by(|a, b| a.ack_time.unwrap().total_cmp(&b.ack_time.unwrap()))
        .and_then(PacketRow::rtt)
        .unwrap_or(base_rtt);

    // ACKs, then sends, then loss checks at equal times.
    let mut events: Vec<(f64, u8, usize)> = Vec::with_capacity(rows.len() * 2);
    for (i, r) in rows.iter().enumerate() {
        events.push((r.send_time, 1, i));
        match r.ack_time {
            Some(a) => events.push((a, 0, i)),
            None if r.recv_time.is_none() => events.push((r.send_time, 2, i)),
            None => {}
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut outstanding: HashMap<u64, usize> = HashMap::new();
    let mut last_rtt = None;
    let mut out = Vec::new();
    for (_, kind, i) in events {
        let row = &rows[i];
        match kind {
            0 => {
                outstanding.remove(&row.seq);
                last_rtt = row.rtt();
            }
            1 => {
                outstanding.insert(row.seq, i);
            }
            _ => {
                let cwnd = outstanding.len() as u64;
                let actual_rtt = last_rtt.unwrap_or(first_rtt);
                let v = vegas_backlog(VegasSample {
                    cwnd: cwnd as f64,
                    base_rtt,
                    actual_rtt,
                });
                // base_rtt is the global minimum, so only a zero RTT fails here
                let n = v.map(|v| v.n).unwrap_or(0.0);
                out.push(VenoEvent {
                    seq: row.seq,
                    send_time: row.send_time,
                    cwnd_segments: cwnd,
                    base_rtt,
                    actual_rtt,
                    n,
                    class: veno_classify(n, thres),
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthPoint {
    pub time: f64,
    pub sbw: f64,
    pub bwe: f64,
}

pub fn westwood_series(rows: &[PacketRow], t: f64) -> Result<Vec<BandwidthPoint>, CliError> {
    let mut est = WestwoodEstimator::new(t).map_err(|e| CliError::invalid(e.to_string()))?;
    let mut acks: Vec<(f64, u32)> = rows
        .iter()
        .filter_map(|r| r.ack_time.map(|a| (a, r.size)))
        .collect();
    acks.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut grouped: Vec<(f64, f64)> = Vec::new();
    for (time, size) in acks {
        match grouped.last_mut() {
            Some((t_last, bytes)) if *t_last == time => *bytes += f64::from(size),
            _ => grouped.push((time, f64::from(size))),
        }
    }

    let mut out = Vec::with_capacity(grouped.len().saturating_sub(1));
    for pair in grouped.windows(2) {
        let ((prev, _), (now, bytes)) = (pair[0], pair[1]);
        let sbw = westwood_sbw(WestwoodSample {
            packet_size: bytes,
            current_time: now,
            prev_ack_time: prev,
        })
        .map_err(|e| CliError::invalid(e.to_string()))?;
        out.push(BandwidthPoint {
            time: now,
            sbw,
            bwe: est.update(sbw),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterPoint {
    pub seq_i: u64,
    pub seq_j: u64,
    pub jitter: f64,
}

pub fn jtcp_series(rows: &[PacketRow]) -> Vec<JitterPoint> {
    let mut delivered: Vec<(&PacketRow, f64)> = rows
        .iter()
        .filter_map(|r| r.recv_time.map(|rt| (r, rt)))
        .collect();
    delivered.sort_by(|a, b| {
        a.0.send_time
            .total_cmp(&b.0.send_time)
            .then(a.0.seq.cmp(&b.0.seq))
    });
    delivered
        .windows(2)
        .map(|w| {
            let ((i, r_i), (j, r_j)) = (w[0], w[1]);
            JitterPoint {
                seq_i: i.seq,
                seq_j: j.seq,
                jitter: jtcp_jitter(JitterPair {
                    s_i: i.send_time,
                    r_i,
                    s_j: j.send_time,
                    r_j,
                }),
            }
        })
        .collect()
}

pub fn run(args: &AnalyzeArgs) -> Result<(), CliError> {
    if !args.thres.is_finite() {
        return Err(CliError::invalid("--thres must be finite"));
    }
    let t = match (args.t, &args.scenario) {
        (Some(t), _) => t,
        (None, Some(path)) => load_scenario(path)?.westwood_t,
        (None, None) => lossdiff_core::netsim::ScenarioConfig::DEFAULT_WESTWOOD_T,
    };
    let rows = read_packets(&args.input)?;
    let veno = veno_events(&rows, args.thres);
    let westwood = westwood_series(&rows, t)?;
    let jtcp = jtcp_series(&rows);

    create_dir(&args.out)?;
    write_file(&args.out.join("veno.csv"), |w| {
        writeln!(
            w,
            "seq,send_time,cwnd_segments,base_rtt_s,actual_rtt_s,backlog,class"
        )?;
        for e in &veno {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                e.seq,
                e.send_time,
                e.cwnd_segments,
                e.base_rtt,
                e.actual_rtt,
                e.n,
                e.class.as_str()
            )?;
        }
        Ok(())
    })?;
    write_file(&args.out.join("westwood.csv"), |w| {
        writeln!(w, "time_s,sbw_bytes_per_s,bwe_bytes_per_s")?;
        for p in &westwood {
            writeln!(w, "{},{},{}", p.time, p.sbw, p.bwe)?;
        }
        Ok(())
    })?;
    write_file(&args.out.join("jtcp.csv"), |w| {
        writeln!(w, "seq_i,seq_j,jitter_s")?;
        for p in &jtcp {
            writeln!(w, "{},{},{}", p.seq_i, p.seq_j, p.jitter)?;
        }
        Ok(())
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(seq: u64, s: f64, r: Option<f64>, a: Option<f64>) -> PacketRow {
        PacketRow {
            seq,
            send_time: s,
            recv_time: r,
            ack_time: a,
            size: 1000,
        }
    }

    #[test]
    fn jitter_of_two_packets() {
        let rows = [row(0, 0.0, Some(10.0), None), row(1, 5.0, Some(17.0), None)];
        let s = jtcp_series(&rows);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].jitter, 2.0);
    }

    #[test]
    fn constant_ack_spacing_gives_constant_sbw() {
        let rows: Vec<_> = (0..20)
            .map(|i| {
                let s = i as f64 * 0.01;
                row(i, s, Some(s + 0.004), Some(s + 0.008))
            })
            .collect();
        let s = westwood_series(&rows, 0.9).unwrap();
        assert_eq!(s.len(), 19);
        for p in &s {
            assert!((p.sbw - 100_000.0).abs() < 1e-6, "{}", p.sbw);
            assert!((p.bwe - 100_000.0).abs() < 1e-6);
        }
    }

    #[test]
    fn simultaneous_acks_are_merged() {
        let rows = [
            row(0, 0.0, Some(0.1), Some(0.2)),
            row(1, 0.0, Some(0.1), Some(0.3)),
            row(2, 0.0, Some(0.1), Some(0.3)),
        ];
        let s = westwood_series(&rows, 0.0).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0].sbw - 20_000.0).abs() < 1e-6);
    }

    #[test]
    fn rtts_at_base_classify_every_loss_as_error() {
        let mut rows = Vec::new();
        for i in 0..50u64 {
            // binary fractions keep every RTT exactly equal
            let s = i as f64 / 1024.0;
            if i % 7 == 3 {
                rows.push(row(i, s, None, None));
            } else {
                rows.push(row(i, s, Some(s + 1.0 / 256.0), Some(s + 1.0 / 128.0)));
            }
        }
        let events = veno_events(&rows, 3.0);
        assert_eq!(events.len(), 7);
        assert!(events
            .iter()
            .all(|e| e.n == 0.0 && e.class == LossClass::ErrorLoss));
    }

    #[test]
    fn queueing_delay_classifies_as_congestion() {
        // 20 segments in flight, RTT doubled from the base
        let mut rows = vec![row(0, 0.0, Some(0.005), Some(0.01))];
        for i in 1..=20u64 {
            rows.push(row(i, 0.01, Some(0.015), Some(0.03)));
        }
        rows.push(row(21, 0.03, None, None));
        let e = veno_events(&rows, 3.0);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].cwnd_segments, 1);
        assert!((e[0].actual_rtt - 0.02).abs() < 1e-12);
        // window counts only unacknowledged segments at the loss
        let mut rows2 = rows.clone();
        rows2.last_mut().unwrap().send_time = 0.02;
        let e = veno_events(&rows2, 3.0);
        assert_eq!(e[0].cwnd_segments, 21);
        assert_eq!(e[0].actual_rtt, 0.01);
    }

    #[test]
    fn retransmitted_segment_counts_once() {
        let rows = [
            row(0, 0.0, None, None),
            row(0, 0.5, Some(0.51), Some(0.52)),
            row(1, 0.6, None, None),
        ];
        let e = veno_events(&rows, 3.0);
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].cwnd_segments, 1);
        assert_eq!(e[1].cwnd_segments, 1);
    }
}
