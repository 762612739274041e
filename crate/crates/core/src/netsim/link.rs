//! Store-and-forward link: one transmitter, a drop-tail FIFO and an
//! optional Bernoulli error-loss stage applied as each segment starts
//! serialization.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::event::{Segment, SegmentKind};
use super::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("bandwidth must be positive")]
pub struct ZeroBandwidth;

/// Store-and-forward serialization time: `size * 8 / bandwidth` seconds.
pub fn serialization_delay(size_bytes: u64, bandwidth_bps: f64) -> Result<f64, ZeroBandwidth> {
    if bandwidth_bps > 0.0 {
        Ok(size_bytes as f64 * 8.0 / bandwidth_bps)
    } else {
        Err(ZeroBandwidth)
    }
}

/// Integer serialization time, rounded up to the next nanosecond.
pub(crate) fn serialization_time(size_bytes: u32, bandwidth_bps: u64) -> SimTime {
    let bits = u128::from(size_bytes) * 8 * u128::from(SimTime::NANOS_PER_SEC);
    let bw = u128::from(bandwidth_bps);
    SimTime(bits.div_ceil(bw) as u64)
}

/// Error-loss generator: ChaCha8 seeded from the scenario seed, one
/// independent stream per link.
pub type LossRng = ChaCha8Rng;

pub fn loss_rng(seed: u64, stream: u64) -> LossRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossOutcome {
    Dropped,
    Passed,
}

/// Consumes exactly one uniform draw `u` in `[0, 1)`; drops when `u < rate`.
pub fn sample_error_loss(rng: &mut LossRng, rate: f64) -> LossOutcome {
    let u: f64 = rng.random();
    if u < rate {
        LossOutcome::Dropped
    } else {
        LossOutcome::Passed
    }
}

/// What happened to a segment offered to a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Offer {
    /// Transmitter was idle; the caller must start it.
    Idle(Segment),
    Queued,
    QueueFull(Segment),
}

#[derive(Debug)]
pub(crate) struct Link {
    pub bandwidth_bps: u64,
    pub propagation: SimTime,
    capacity: Option<usize>,
    loss_rate: f64,
    rng: LossRng,
    queue: VecDeque<Segment>,
    busy: bool,
    pub max_occupancy: usize,
}

impl Link {
    pub fn new(
        bandwidth_bps: u64,
        propagation: SimTime,
        capacity: Option<usize>,
        loss_rate: f64,
        rng: LossRng,
    ) -> Self {
        Link {
            bandwidth_bps,
            propagation,
            capacity,
            loss_rate,
            rng,
            queue: VecDeque::new(),
            busy: false,
            max_occupancy: 0,
        }
    }

    pub fn offer(&mut self, seg: Segment) -> Offer {
        if !self.busy {
            return Offer::Idle(seg);
        }
        if self.capacity.is_some_and(|cap| self.queue.len() >= cap) {
            return Offer::QueueFull(seg);
        }
        self.queue.push_back(seg);
        self.max_occupancy = self.max_occupancy.max(self.queue.len());
        Offer::Queued
    }

    /// Draws the error-loss fate of a data segment about to be serialized.
    /// Links with a zero loss rate do not consume draws.
    pub fn corrupts(&mut self, seg: &Segment) -> bool {
        seg.kind == SegmentKind::Data
            && self.loss_rate > 0.0
            && sample_error_loss(&mut self.rng, self.loss_rate) == LossOutcome::Dropped
    }

    pub fn set_busy(&mut self, busy: bool) {
        self.busy = busy;
    }

    pub fn next_queued(&mut self) -> Option<Segment> {
        self.queue.pop_front()
    }

    pub fn queued(&self) -> impl Iterator<Item = &Segment> {
        self.queue.iter()
    }

    pub fn serialization(&self, seg: &Segment) -> SimTime {
        serialization_time(seg.size, self.bandwidth_bps)
    }
}
