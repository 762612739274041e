//! Plain-text summaries: `key=value` lines, one per field.

use std::fmt::{self, Write as _};

use lossdiff_core::netsim::{RunResult, ScenarioConfig};

/// Summary block for one run, as written to `summary.txt`.
pub fn run_summary(cfg: &ScenarioConfig, r: &RunResult) -> String {
    let mut s = String::new();
    let snr = cfg
        .link_ri_r
        .snr_db
        .map(|v| v.to_string())
        .unwrap_or_else(|| "none".into());
    let t = &r.totals;
    let _ = write!(
        s,
        "controller={}\n\
         seed={}\n\
         duration_s={}\n\
         link_mode_ri_r={}\n\
         snr_db={snr}\n\
         error_loss_rate={}\n\
         goodput_pps={:.3}\n\
         throughput_bps={:.0}\n\
         packets_sent={}\n\
         packets_delivered={}\n\
         unique_delivered={}\n\
         error_drops={}\n\
         queue_drops={}\n\
         in_flight_at_end={}\n\
         timeouts={}\n\
         halvings={}\n\
         retransmissions={}\n\
         cwnd_stats_from_s={}\n\
         min_cwnd_bytes={}\n\
         max_cwnd_bytes={}\n\
         mean_cwnd_bytes={:.1}\n\
         cwnd_min_max_ratio={:.4}\n\
         final_cwnd_bytes={}\n\
         max_router_queue={}\n\
         router_queue_capacity={}\n",
        r.controller,
        cfg.seed,
        cfg.duration_s,
        match cfg.link_ri_r.link_mode {
            lossdiff_core::header::LinkMode::Wired => "wired",
            lossdiff_core::header::LinkMode::Wireless => "wireless",
        },
        cfg.link_ri_r.error_loss_rate,
        r.goodput_pps,
        r.throughput_bps,
        t.packets_sent,
        t.packets_delivered,
        t.unique_delivered,
        t.error_drops,
        t.queue_drops,
        t.in_flight_at_end,
        t.timeouts,
        t.halvings,
        t.retransmissions,
        r.cwnd.from,
        r.cwnd.min,
        r.cwnd.max,
        r.cwnd.mean,
        r.cwnd.min_max_ratio(),
        r.final_cwnd,
        r.max_router_queue,
        r.router_queue_capacity,
    );
    s
}

/// Both controllers on one loss-rate point, same seed and topology.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub loss_rate: f64,
    pub seed: u64,
    pub rfc793: RunResult,
    pub snr: RunResult,
}

impl ComparisonReport {
    /// Goodput of the SNR scheme over the baseline's.
    pub fn goodput_ratio(&self) -> f64 {
        self.snr.goodput_pps / self.rfc793.goodput_pps
    }

    pub fn runs(&self) -> [&RunResult; 2] {
        [&self.rfc793, &self.snr]
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[loss_rate={}]", self.loss_rate)?;
        writeln!(f, "seed={}", self.seed)?;
        writeln!(f, "goodput_ratio={:.4}", self.goodput_ratio())?;
        for r in self.runs() {
            let c = r.controller;
            let t = &r.totals;
            writeln!(f, "{c}.goodput_pps={:.3}", r.goodput_pps)?;
            writeln!(f, "{c}.cwnd_min_max_ratio={:.4}", r.cwnd.min_max_ratio())?;
            writeln!(f, "{c}.min_cwnd_bytes={}", r.cwnd.min)?;
            writeln!(f, "{c}.max_cwnd_bytes={}", r.cwnd.max)?;
            writeln!(f, "{c}.timeouts={}", t.timeouts)?;
            writeln!(f, "{c}.halvings={}", t.halvings)?;
            writeln!(f, "{c}.retransmissions={}", t.retransmissions)?;
            writeln!(f, "{c}.error_drops={}", t.error_drops)?;
            writeln!(f, "{c}.queue_drops={}", t.queue_drops)?;
        }
        Ok(())
    }
}
