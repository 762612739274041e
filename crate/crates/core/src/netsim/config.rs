//! Scenario description for the three-node topology
//! client C -> router RI -> receiver R.

use thiserror::Error;

use crate::congestion::{Controller, SnrThreshold};
use crate::header::LinkMode;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid `{key}`: {reason}")]
pub struct ConfigError {
    /// Scenario-file key the problem belongs to.
    pub key: &'static str,
    pub reason: String,
}

impl ConfigError {
    pub fn new(key: &'static str, reason: impl Into<String>) -> Self {
        ConfigError {
            key,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub bandwidth_bps: u64,
    pub propagation_s: f64,
    /// Drop-tail capacity in packets, excluding the one being serialized.
    pub queue_capacity: usize,
    pub error_loss_rate: f64,
    pub link_mode: LinkMode,
    /// Required for wireless links.
    pub snr_db: Option<f64>,
}

/// Scenario keys a link's fields come from, for error reporting.
struct LinkKeys {
    bandwidth: &'static str,
    propagation: &'static str,
}

const C_RI_KEYS: LinkKeys = LinkKeys {
    bandwidth: "bandwidth_c_ri_bps",
    propagation: "prop_c_ri_s",
};

const RI_R_KEYS: LinkKeys = LinkKeys {
    bandwidth: "bandwidth_ri_r_bps",
    propagation: "prop_ri_r_s",
};

impl LinkSpec {
    fn validate(&self, keys: &LinkKeys) -> Result<(), ConfigError> {
        if self.bandwidth_bps == 0 {
            return Err(ConfigError::new(
                keys.bandwidth,
                "bandwidth must be positive",
            ));
        }
        if !(self.propagation_s.is_finite() && self.propagation_s >= 0.0) {
            return Err(ConfigError::new(
                keys.propagation,
                "propagation delay must be a finite non-negative number",
            ));
        }
        if self.queue_capacity == 0 {
            return Err(ConfigError::new("queue_capacity", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.error_loss_rate) {
            return Err(ConfigError::new(
                "error_loss_rate",
                format!("{} is not a probability", self.error_loss_rate),
            ));
        }
        if self.link_mode == LinkMode::Wireless {
            match self.snr_db {
                Some(snr) if snr.is_finite() => {}
                Some(_) => return Err(ConfigError::new("snr_db", "must be finite")),
                None => return Err(ConfigError::new("snr_db", "required for a wireless link")),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    Rfc793,
    Snr,
}

impl ControllerKind {
    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Rfc793 => "rfc793",
            ControllerKind::Snr => "snr",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rfc793" => Some(ControllerKind::Rfc793),
            "snr" | "snr_scheme" => Some(ControllerKind::Snr),
            _ => None,
        }
    }
}

/// How the sender's application offers data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadMode {
    /// Always has data; sends whenever the window allows.
    Bulk,
    /// One transmission slot every `1/pps` seconds, retransmissions first.
    Paced { pps: f64 },
}

/// When the SNR scheme reads the link SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrSampling {
    /// Once, at connection setup.
    #[default]
    AtSetup,
    /// Re-read from the link on every timeout.
    PerTimeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub link_c_ri: LinkSpec,
    pub link_ri_r: LinkSpec,
    /// Bytes per data segment; "1 KB" is 1000 bytes.
    pub packet_size: u32,
    pub duration_s: f64,
    pub seed: u64,
    pub controller: ControllerKind,
    pub rwnd: u64,
    /// Window growth unit. Equal to `packet_size`.
    pub mss: u64,
    pub snr_threshold_db: f64,
    pub snr_sampling: SnrSampling,
    pub rto_initial_s: f64,
    pub rto_min_s: f64,
    pub srtt_weight: f64,
    pub load: LoadMode,
    /// Not used by the simulator; carried for the trace analyzer.
    pub westwood_t: f64,
}

impl ScenarioConfig {
    pub const DEFAULT_SNR_THRESHOLD_DB: f64 = SnrThreshold::DEFAULT_DB;
    pub const DEFAULT_RTO_INITIAL_S: f64 = 1.0;
    pub const DEFAULT_RTO_MIN_S: f64 = 0.01;
    pub const DEFAULT_SRTT_WEIGHT: f64 = 0.875;
    pub const DEFAULT_WESTWOOD_T: f64 = 0.9;

    /// 100 Mbps / 5 ms wired hop into an 80 Mbps / 2 ms wireless hop,
    /// 1000-byte packets, 100-packet router queue, 350 s. The receiver
    /// window (64 segments) stays below the queue capacity, so the router
    /// queue never overflows and every loss is an error loss.
    pub fn wireless_reference() -> Self {
        ScenarioConfig {
            link_c_ri: LinkSpec {
                bandwidth_bps: 100_000_000,
                propagation_s: 0.005,
                queue_capacity: 100,
                error_loss_rate: 0.0,
                link_mode: LinkMode::Wired,
                snr_db: None,
            },
            link_ri_r: LinkSpec {
                bandwidth_bps: 80_000_000,
                propagation_s: 0.002,
                queue_capacity: 100,
                error_loss_rate: 0.0,
                link_mode: LinkMode::Wireless,
                snr_db: Some(3.0),
            },
            packet_size: 1000,
            duration_s: 350.0,
            seed: 1,
            controller: ControllerKind::Snr,
            rwnd: 64_000,
            mss: 1000,
            snr_threshold_db: Self::DEFAULT_SNR_THRESHOLD_DB,
            snr_sampling: SnrSampling::AtSetup,
            rto_initial_s: Self::DEFAULT_RTO_INITIAL_S,
            rto_min_s: Self::DEFAULT_RTO_MIN_S,
            srtt_weight: Self::DEFAULT_SRTT_WEIGHT,
            load: LoadMode::Bulk,
            westwood_t: Self::DEFAULT_WESTWOOD_T,
        }
    }

    pub fn with_controller(mut self, controller: ControllerKind) -> Self {
        self.controller = controller;
        self
    }

    pub fn with_error_loss_rate(mut self, rate: f64) -> Self {
        self.link_ri_r.error_loss_rate = rate;
        self
    }

    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.link_ri_r.snr_db = Some(snr_db);
        self
    }

    pub fn with_duration(mut self, duration_s: f64) -> Self {
        self.duration_s = duration_s;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_rwnd(mut self, rwnd: u64) -> Self {
        self.rwnd = rwnd;
        self
    }

    pub fn controller(&self) -> Controller {
        match self.controller {
            ControllerKind::Rfc793 => Controller::Rfc793,
            ControllerKind::Snr => Controller::SnrScheme {
                threshold: SnrThreshold::new(self.snr_threshold_db).unwrap_or_default(),
            },
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.link_c_ri.validate(&C_RI_KEYS)?;
        self.link_ri_r.validate(&RI_R_KEYS)?;
        if self.packet_size == 0 || self.packet_size > u32::from(u16::MAX) {
            return Err(ConfigError::new(
                "packet_size_bytes",
                "must be between 1 and 65535",
            ));
        }
        if self.mss != u64::from(self.packet_size) {
            return Err(ConfigError::new(
                "mss_bytes",
                format!(
                    "must equal packet_size_bytes ({}), got {}",
                    self.packet_size, self.mss
                ),
            ));
        }
        if self.rwnd < self.mss {
            return Err(ConfigError::new("rwnd_bytes", "must be at least one mss"));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(ConfigError::new("duration_s", "must be positive"));
        }
        if !self.snr_threshold_db.is_finite() {
            return Err(ConfigError::new("snr_threshold_db", "must be finite"));
        }
        if !(self.rto_initial_s.is_finite() && self.rto_initial_s > 0.0) {
            return Err(ConfigError::new("rto_initial_s", "must be positive"));
        }
        if !(self.rto_min_s.is_finite() && self.rto_min_s > 0.0) {
            return Err(ConfigError::new("rto_min_s", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.srtt_weight) {
            return Err(ConfigError::new("srtt_weight", "must lie in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.westwood_t) {
            return Err(ConfigError::new("westwood_t", "must lie in [0, 1]"));
        }
        if let LoadMode::Paced { pps } = self.load {
            if !(pps.is_finite() && pps > 0.0) {
                return Err(ConfigError::new("paced_pps", "must be positive"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_is_valid() {
        ScenarioConfig::wireless_reference().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let base = ScenarioConfig::wireless_reference();
        let err = base
            .clone()
            .with_error_loss_rate(1.5)
            .validate()
            .unwrap_err();
        assert_eq!(err.key, "error_loss_rate");

        let mut cfg = base.clone();
        cfg.link_ri_r.snr_db = None;
        assert_eq!(cfg.validate().unwrap_err().key, "snr_db");

        let mut cfg = base.clone();
        cfg.mss = 1460;
        assert_eq!(cfg.validate().unwrap_err().key, "mss_bytes");

        let mut cfg = base.clone();
        cfg.link_c_ri.bandwidth_bps = 0;
        assert_eq!(cfg.validate().unwrap_err().key, "bandwidth_c_ri_bps");

        let mut cfg = base.clone();
        cfg.load = LoadMode::Paced { pps: 0.0 };
        assert_eq!(cfg.validate().unwrap_err().key, "paced_pps");

        assert_eq!(base.with_rwnd(10).validate().unwrap_err().key, "rwnd_bytes");
    }

    #[test]
    fn wired_link_needs_no_snr() {
        let mut cfg = ScenarioConfig::wireless_reference();
        cfg.link_ri_r.link_mode = LinkMode::Wired;
        cfg.link_ri_r.snr_db = None;
        cfg.validate().unwrap();
    }
}
