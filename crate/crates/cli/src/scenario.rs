//! Scenario files: one `key = value` per line, `#` starts a comment.
//!
//! ```text
//! # C -> RI wired hop
//! bandwidth_c_ri_bps = 100e6
//! prop_c_ri_s        = 0.005
//! ```
//!
//! Every key in [`REQUIRED_KEYS`] must appear (`snr_db` only for a wireless
//! RI -> R link); the optional keys fall back to the documented defaults.
//! Unknown and repeated keys are rejected.

use std::collections::HashMap;
use std::fmt;

use lossdiff_core::header::LinkMode;
use lossdiff_core::netsim::{ControllerKind, LinkSpec, LoadMode, ScenarioConfig, SnrSampling};
use thiserror::Error;

pub const REQUIRED_KEYS: [&str; 14] = [
    "bandwidth_c_ri_bps",
    "prop_c_ri_s",
    "bandwidth_ri_r_bps",
    "prop_ri_r_s",
    "queue_capacity",
    "packet_size_bytes",
    "duration_s",
    "seed",
    "controller",
    "link_mode_ri_r",
    "snr_db",
    "error_loss_rate",
    "rwnd_bytes",
    "mss_bytes",
];

pub const OPTIONAL_KEYS: [&str; 8] = [
    "snr_threshold_db",
    "rto_min_s",
    "srtt_weight",
    "westwood_t",
    "load_mode",
    "paced_pps",
    "rto_initial_s",
    "snr_sampling",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ScenarioError {
    pub line: Option<usize>,
    pub kind: ScenarioErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioErrorKind {
    MissingKey(&'static str),
    UnknownKey(String),
    DuplicateKey(String),
    Syntax(String),
    Malformed { key: String, value: String },
    OutOfRange { key: String, reason: String },
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        match &self.kind {
            ScenarioErrorKind::MissingKey(k) => write!(f, "missing required key `{k}`"),
            ScenarioErrorKind::UnknownKey(k) => write!(f, "unknown key `{k}`"),
            ScenarioErrorKind::DuplicateKey(k) => write!(f, "duplicate key `{k}`"),
            ScenarioErrorKind::Syntax(l) => write!(f, "expected `key = value`, found `{l}`"),
            ScenarioErrorKind::Malformed { key, value } => {
                write!(f, "malformed value `{value}` for `{key}`")
            }
            ScenarioErrorKind::OutOfRange { key, reason } => {
                write!(f, "`{key}` out of range: {reason}")
            }
        }
    }
}

struct Entries<'a> {
    values: HashMap<&'a str, (usize, &'a str)>,
}

impl<'a> Entries<'a> {
    fn parse(text: &'a str) -> Result<Self, ScenarioError> {
        let mut values = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(at(line, ScenarioErrorKind::Syntax(content.to_string())));
            };
            let (key, value) = (key.trim(), value.trim());
            if !REQUIRED_KEYS.contains(&key) && !OPTIONAL_KEYS.contains(&key) {
                return Err(at(line, ScenarioErrorKind::UnknownKey(key.to_string())));
            }
            if values.insert(key, (line, value)).is_some() {
                return Err(at(line, ScenarioErrorKind::DuplicateKey(key.to_string())));
            }
        }
        Ok(Entries { values })
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.values.get(key).map(|(l, _)| *l)
    }

    fn required(&self, key: &'static str) -> Result<(usize, &'a str), ScenarioError> {
        self.values.get(key).copied().ok_or(ScenarioError {
            line: None,
            kind: ScenarioErrorKind::MissingKey(key),
        })
    }

    fn get<T>(
        &self,
        key: &'static str,
        parse: impl Fn(&str) -> Option<T>,
        check: impl Fn(&T) -> Result<(), String>,
    ) -> Result<T, ScenarioError> {
        let (line, raw) = self.required(key)?;
        typed(line, key, raw, parse, check)
    }

    fn get_or<T>(
        &self,
        key: &'static str,
        default: T,
        parse: impl Fn(&str) -> Option<T>,
        check: impl Fn(&T) -> Result<(), String>,
    ) -> Result<T, ScenarioError> {
        match self.values.get(key) {
            Some(&(line, raw)) => typed(line, key, raw, parse, check),
            None => Ok(default),
        }
    }
}

fn at(line: usize, kind: ScenarioErrorKind) -> ScenarioError {
    ScenarioError {
        line: Some(line),
        kind,
    }
}

fn typed<T>(
    line: usize,
    key: &str,
    raw: &str,
    parse: impl Fn(&str) -> Option<T>,
    check: impl Fn(&T) -> Result<(), String>,
) -> Result<T, ScenarioError> {
    let value = parse(raw).ok_or_else(|| {
        at(
            line,
            ScenarioErrorKind::Malformed {
                key: key.to_string(),
                value: raw.to_string(),
            },
        )
    })?;
    check(&value).map_err(|reason| {
        at(
            line,
            ScenarioErrorKind::OutOfRange {
                key: key.to_string(),
                reason,
            },
        )
    })?;
    Ok(value)
}

fn float(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Whole numbers, also written in exponent form (`100e6`).
fn count(s: &str) -> Option<u64> {
    if let Ok(v) = s.parse::<u64>() {
        return Some(v);
    }
    let v = float(s)?;
    (v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64).then_some(v as u64)
}

fn any<T>(_: &T) -> Result<(), String> {
    Ok(())
}

fn positive(v: &f64) -> Result<(), String> {
    if *v > 0.0 {
        Ok(())
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn non_negative(v: &f64) -> Result<(), String> {
    if *v >= 0.0 {
        Ok(())
    } else {
        Err(format!("{v} must not be negative"))
    }
}

fn at_least_one(v: &u64) -> Result<(), String> {
    if *v >= 1 {
        Ok(())
    } else {
        Err("must be at least 1".into())
    }
}

fn probability(v: &f64) -> Result<(), String> {
    if (0.0..=1.0).contains(v) {
        Ok(())
    } else {
        Err(format!("{v} is not in [0, 1]"))
    }
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let e = Entries::parse(text)?;

    let bandwidth_c_ri = e.get("bandwidth_c_ri_bps", count, at_least_one)?;
    let prop_c_ri = e.get("prop_c_ri_s", float, non_negative)?;
    let bandwidth_ri_r = e.get("bandwidth_ri_r_bps", count, at_least_one)?;
    let prop_ri_r = e.get("prop_ri_r_s", float, non_negative)?;
    let queue = e.get("queue_capacity", count, at_least_one)?;
    let packet_size = e.get("packet_size_bytes", count, |v| {
        if (1..=65_535).contains(v) {
            Ok(())
        } else {
            Err(format!("{v} is not in 1..=65535"))
        }
    })?;
    let duration = e.get("duration_s", float, positive)?;
    let seed = e.get("seed", |s| s.parse::<u64>().ok(), any)?;
    let controller = e.get("controller", ControllerKind::parse, any)?;
    let link_mode = e.get("link_mode_ri_r", parse_link_mode, any)?;
    let snr_db = match link_mode {
        LinkMode::Wireless => Some(e.get("snr_db", float, any)?),
        LinkMode::Wired => e.get_or("snr_db", None, |s| float(s).map(Some), any)?,
    };
    let loss = e.get("error_loss_rate", float, probability)?;
    let rwnd = e.get("rwnd_bytes", count, at_least_one)?;
    let mss = e.get("mss_bytes", count, at_least_one)?;

    let snr_threshold_db = e.get_or(
        "snr_threshold_db",
        ScenarioConfig::DEFAULT_SNR_THRESHOLD_DB,
        float,
        any,
    )?;
    let rto_min_s = e.get_or(
        "rto_min_s",
        ScenarioConfig::DEFAULT_RTO_MIN_S,
        float,
        positive,
    )?;
    let rto_initial_s = e.get_or(
        "rto_initial_s",
        ScenarioConfig::DEFAULT_RTO_INITIAL_S,
        float,
        positive,
    )?;
    let srtt_weight = e.get_or(
        "srtt_weight",
        ScenarioConfig::DEFAULT_SRTT_WEIGHT,
        float,
        |v| {
            if (0.0..1.0).contains(v) {
                Ok(())
            } else {
                Err(format!("{v} is not in [0, 1)"))
            }
        },
    )?;
    let westwood_t = e.get_or(
        "westwood_t",
        ScenarioConfig::DEFAULT_WESTWOOD_T,
        float,
        probability,
    )?;
    let paced = e.get_or("load_mode", false, parse_load_mode, any)?;
    let load = if paced {
        LoadMode::Paced {
            pps: e.get("paced_pps", float, positive)?,
        }
    } else {
        LoadMode::Bulk
    };
    let snr_sampling = e.get_or(
        "snr_sampling",
        SnrSampling::AtSetup,
        |s| match s {
            "setup" => Some(SnrSampling::AtSetup),
            "per_timeout" => Some(SnrSampling::PerTimeout),
            _ => None,
        },
        any,
    )?;

    let cfg = ScenarioConfig {
        link_c_ri: LinkSpec {
            bandwidth_bps: bandwidth_c_ri,
            propagation_s: prop_c_ri,
            queue_capacity: queue as usize,
            error_loss_rate: 0.0,
            link_mode: LinkMode::Wired,
            snr_db: None,
        },
        link_ri_r: LinkSpec {
            bandwidth_bps: bandwidth_ri_r,
            propagation_s: prop_ri_r,
            queue_capacity: queue as usize,
            error_loss_rate: loss,
            link_mode,
            snr_db,
        },
        packet_size: packet_size as u32,
        duration_s: duration,
        seed,
        controller,
        rwnd,
        mss,
        snr_threshold_db,
        snr_sampling,
        rto_initial_s,
        rto_min_s,
        srtt_weight,
        load,
        westwood_t,
    };
    cfg.validate().map_err(|err| ScenarioError {
        line: e.line_of(err.key),
        kind: ScenarioErrorKind::OutOfRange {
            key: err.key.to_string(),
            reason: err.reason,
        },
    })?;
    Ok(cfg)
}

fn parse_link_mode(s: &str) -> Option<LinkMode> {
    match s {
        "wired" => Some(LinkMode::Wired),
        "wireless" => Some(LinkMode::Wireless),
        _ => None,
    }
}

fn parse_load_mode(s: &str) -> Option<bool> {
    match s {
        "bulk" => Some(false),
        "paced" => Some(true),
        _ => None,
    }
}
