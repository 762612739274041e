//! Trace rows produced by the simulator and their CSV form.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::netsim::SimTime;

pub const TRACE_CSV_HEADER: &str = "time_s,cwnd_bytes,event,seq,throughput_bps";
pub const TRANSMISSION_CSV_HEADER: &str = "seq,send_time,recv_time,ack_time,size";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceEvent {
    Ack,
    Timeout,
    Halve,
    Retransmit,
    QueueDrop,
    ErrorDrop,
    Deliver,
}

impl TraceEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceEvent::Ack => "ack",
            TraceEvent::Timeout => "timeout",
            TraceEvent::Halve => "halve",
            TraceEvent::Retransmit => "retransmit",
            TraceEvent::QueueDrop => "queue_drop",
            TraceEvent::ErrorDrop => "error_drop",
            TraceEvent::Deliver => "deliver",
        }
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceParseError {
    #[error("expected 5 columns, found {0}")]
    ColumnCount(usize),
    #[error("bad value `{value}` in column `{column}`")]
    BadValue { column: &'static str, value: String },
}

impl FromStr for TraceEvent {
    type Err = TraceParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "ack" => TraceEvent::Ack,
            "timeout" => TraceEvent::Timeout,
            "halve" => TraceEvent::Halve,
            "retransmit" => TraceEvent::Retransmit,
            "queue_drop" => TraceEvent::QueueDrop,
            "error_drop" => TraceEvent::ErrorDrop,
            "deliver" => TraceEvent::Deliver,
            _ => {
                return Err(TraceParseError::BadValue {
                    column: "event",
                    value: s.to_string(),
                })
            }
        })
    }
}

/// One trace row. `seq` is the segment number (0-based) and
/// `throughput_bps` counts data bits delivered in the trailing second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRecord {
    pub time: SimTime,
    pub cwnd: u64,
    pub event: TraceEvent,
    pub seq: u64,
    pub throughput_bps: u64,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{}",
            self.time, self.cwnd, self.event, self.seq, self.throughput_bps
        )
    }
}

impl FromStr for TraceRecord {
    type Err = TraceParseError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let cols: Vec<&str> = line.trim_end().split(',').collect();
        if cols.len() != 5 {
            return Err(TraceParseError::ColumnCount(cols.len()));
        }
        fn num<T: FromStr>(column: &'static str, v: &str) -> Result<T, TraceParseError> {
            v.parse().map_err(|_| TraceParseError::BadValue {
                column,
                value: v.to_string(),
            })
        }
        let secs: f64 = num("time_s", cols[0])?;
        if !(secs.is_finite() && secs >= 0.0) {
            return Err(TraceParseError::BadValue {
                column: "time_s",
                value: cols[0].to_string(),
            });
        }
        Ok(TraceRecord {
            time: SimTime::from_secs_f64(secs),
            cwnd: num("cwnd_bytes", cols[1])?,
            event: cols[2].parse()?,
            seq: num("seq", cols[3])?,
            throughput_bps: num("throughput_bps", cols[4])?,
        })
    }
}

pub fn write_trace_csv<W: Write>(mut w: W, records: &[TraceRecord]) -> io::Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{r}")?;
    }
    w.flush()
}

/// One data transmission as seen end to end. Lost copies have no receive
/// or ACK time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransmissionRecord {
    pub seq: u64,
    pub send_time: SimTime,
    pub recv_time: Option<SimTime>,
    pub ack_time: Option<SimTime>,
    pub size: u32,
}

pub fn write_transmissions_csv<W: Write>(
    mut w: W,
    records: &[TransmissionRecord],
) -> io::Result<()> {
    fn opt(t: Option<SimTime>) -> String {
        t.map(|t| t.to_string()).unwrap_or_default()
    }
    writeln!(w, "{TRANSMISSION_CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.seq,
            r.send_time,
            opt(r.recv_time),
            opt(r.ack_time),
            r.size
        )?;
    }
    w.flush()
}
