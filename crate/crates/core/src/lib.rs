//! Loss-differentiating TCP congestion control.
//!
//! The sender marks the connection's link type in a reserved TCP header bit
//! and, on a wireless link, uses the link SNR to decide whether a timeout
//! is congestion (halve the window) or a transmission error (retransmit and
//! keep the window). The crate contains the header codec, both controllers,
//! a set of related-work loss estimators and a discrete-event simulator to
//! compare them.

pub mod congestion;
pub mod estimators;
pub mod header;
pub mod netsim;
pub mod trace;

pub use congestion::{
    decide_timeout, effective_window, snr_db, snr_linear, CongestionError, CongestionState,
    Controller, SnrMeasure, SnrThreshold, TimeoutDecision,
};
pub use header::{decode_header, encode_header, set_link_mode, HeaderError, LinkMode, TcpHeader};
pub use netsim::{run_scenario, run_scenario_with, RunOptions, RunResult, ScenarioConfig};
pub use trace::{TraceEvent, TraceRecord};
