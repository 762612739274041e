use thiserror::Error;

use super::time::SimTime;
use crate::trace::{TraceRecord, TransmissionRecord};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("measurement window must be positive (got {0} s)")]
pub struct EmptyWindow(pub f64);

/// Delivered packets per second over `window_s`.
pub fn measure_goodput(delivered: u64, window_s: f64) -> Result<f64, EmptyWindow> {
    if window_s > 0.0 {
        Ok(delivered as f64 / window_s)
    } else {
        Err(EmptyWindow(window_s))
    }
}

/// Event counters for one run.
///
/// `packets_sent` counts every data transmission, retransmissions included,
/// and `packets_delivered` every copy reaching the receiver, so that
/// `error_drops + queue_drops + packets_delivered + in_flight_at_end == packets_sent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Totals {
    pub packets_sent: u64,
    pub packets_delivered: u64,
    /// Distinct segments delivered (duplicates excluded).
    pub unique_delivered: u64,
    pub error_drops: u64,
    pub queue_drops: u64,
    pub in_flight_at_end: u64,
    pub retransmissions: u64,
    pub timeouts: u64,
    pub halvings: u64,
}

impl Totals {
    pub fn is_conserved(&self) -> bool {
        self.error_drops + self.queue_drops + self.packets_delivered + self.in_flight_at_end
            == self.packets_sent
    }
}

/// Time-weighted congestion window statistics over `[from, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwndStats {
    pub from: SimTime,
    pub min: u64,
    pub max: u64,
    pub mean: f64,
}

impl CwndStats {
    pub fn min_max_ratio(&self) -> f64 {
        self.min as f64 / self.max as f64
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub controller: &'static str,
    pub duration_s: f64,
    pub trace: Vec<TraceRecord>,
    pub transmissions: Vec<TransmissionRecord>,
    pub totals: Totals,
    /// Unique deliveries per second.
    pub goodput_pps: f64,
    /// Delivered data bits per second, duplicates included.
    pub throughput_bps: f64,
    /// Window statistics after the initial growth phase, which ends when
    /// the window first reaches the receiver window or is first halved.
    /// Falls back to the whole run if that never happens.
    pub cwnd: CwndStats,
    /// Window statistics over the whole run.
    pub cwnd_full: CwndStats,
    pub final_cwnd: u64,
    /// Highest router (RI -> R) queue occupancy observed.
    pub max_router_queue: usize,
    pub router_queue_capacity: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goodput_examples() {
        assert_eq!(measure_goodput(150, 1.0).unwrap(), 150.0);
        assert_eq!(measure_goodput(0, 3.0).unwrap(), 0.0);
        assert_eq!(measure_goodput(75, 1.0).unwrap(), 75.0);
        assert!(measure_goodput(10, 0.0).is_err());
    }
}
