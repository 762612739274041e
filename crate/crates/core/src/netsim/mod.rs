//! Deterministic discrete-event simulation of a single bulk or paced
//! connection over client -> router -> receiver.
//!
//! The router's outbound queue is drop-tail, which is the only source of
//! congestion loss. The RI -> R hop may add Bernoulli error loss. ACKs
//! (40 bytes) take the reverse path, consume bandwidth and are never lost.

mod config;
mod event;
mod link;
mod result;
mod rto;
mod sim;
mod time;

pub use config::{ConfigError, ControllerKind, LinkSpec, LoadMode, ScenarioConfig, SnrSampling};
pub use event::{Event, EventKind, EventQueue, LinkId, Segment, SegmentKind};
pub use link::{
    loss_rng, sample_error_loss, serialization_delay, LossOutcome, LossRng, ZeroBandwidth,
};
pub use result::{measure_goodput, CwndStats, EmptyWindow, RunResult, Totals};
pub use rto::{rto_update, RtoEstimator};
pub use sim::{RunOptions, Simulation, ACK_SIZE_BYTES};
pub use time::SimTime;

/// Runs a scenario to completion, recording the full trace.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult, ConfigError> {
    run_scenario_with(cfg, RunOptions::default())
}

pub fn run_scenario_with(cfg: &ScenarioConfig, opts: RunOptions) -> Result<RunResult, ConfigError> {
    Ok(Simulation::new(cfg, opts)?.run())
}
