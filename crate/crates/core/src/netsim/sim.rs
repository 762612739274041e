//! Event-driven run of one sender over C -> RI -> R.
//!
//! The sender keeps per-packet timers and the receiver acknowledges every
//! copy it gets, so each segment is individually acknowledged. A timeout
//! fires `rto` after a packet's latest transmission; the controller classifies
//! it and the packet goes out again, bypassing the window since it is
//! already counted as outstanding.

use std::collections::VecDeque;

use super::config::{LoadMode, ScenarioConfig, SnrSampling};
use super::event::{Event, EventKind, EventQueue, LinkId, Segment, SegmentKind};
use super::link::{loss_rng, Link, Offer};
use super::result::{measure_goodput, CwndStats, RunResult, Totals};
use super::rto::RtoEstimator;
use super::time::SimTime;
use super::ConfigError;
use crate::congestion::{CongestionState, Controller, TimeoutDecision};
use crate::header::{
    decode_header, encode_with_checksum, pseudo_header, set_link_mode, LinkMode, TcpFlags,
    TcpHeader, HEADER_LEN,
};
use crate::trace::{TraceEvent, TraceRecord, TransmissionRecord};

pub const ACK_SIZE_BYTES: u32 = 40;
const SENDER_PORT: u16 = 49152;
const RECEIVER_PORT: u16 = 80;
const THROUGHPUT_WINDOW: SimTime = SimTime(SimTime::NANOS_PER_SEC);

/// What a run keeps besides its counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub record_trace: bool,
    pub record_transmissions: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            record_trace: true,
            record_transmissions: true,
        }
    }
}

impl RunOptions {
    pub fn summary_only() -> Self {
        RunOptions {
            record_trace: false,
            record_transmissions: false,
        }
    }
}

#[derive(Debug)]
struct Packet {
    size: u32,
    header: [u8; HEADER_LEN],
    first_send: SimTime,
    transmit_count: u32,
    acked: bool,
}

/// Outstanding packets indexed by id; acknowledged packets are released
/// from the front.
#[derive(Debug, Default)]
struct PacketWindow {
    base: u64,
    packets: VecDeque<Packet>,
}

impl PacketWindow {
    fn next_id(&self) -> u64 {
        self.base + self.packets.len() as u64
    }

    fn push(&mut self, p: Packet) -> u64 {
        let id = self.next_id();
        self.packets.push_back(p);
        id
    }

    fn get_mut(&mut self, id: u64) -> Option<&mut Packet> {
        let idx = id.checked_sub(self.base)?;
        self.packets.get_mut(idx as usize)
    }

    fn release_acked(&mut self) {
        while self.packets.front().is_some_and(|p| p.acked) {
            self.packets.pop_front();
            self.base += 1;
        }
    }
}

#[derive(Debug, Default)]
struct ThroughputWindow {
    deliveries: VecDeque<(SimTime, u64)>,
    bits: u64,
}

impl ThroughputWindow {
    fn add(&mut self, t: SimTime, bits: u64) {
        self.deliveries.push_back((t, bits));
        self.bits += bits;
    }

    /// Bits delivered in `(t - 1 s, t]`, i.e. bits per second.
    fn at(&mut self, t: SimTime) -> u64 {
        while let Some(&(at, bits)) = self.deliveries.front() {
            if at.0 + THROUGHPUT_WINDOW.0 <= t.0 {
                self.deliveries.pop_front();
                self.bits -= bits;
            } else {
                break;
            }
        }
        self.bits
    }
}

#[derive(Debug, Clone, Copy)]
struct CwndAccum {
    start: SimTime,
    last: SimTime,
    current: u64,
    min: u64,
    max: u64,
    area: u128,
}

impl CwndAccum {
    fn new(t: SimTime, cwnd: u64) -> Self {
        CwndAccum {
            start: t,
            last: t,
            current: cwnd,
            min: cwnd,
            max: cwnd,
            area: 0,
        }
    }

    fn update(&mut self, t: SimTime, cwnd: u64) {
        self.area += u128::from(self.current) * u128::from((t - self.last).0);
        self.last = t;
        self.current = cwnd;
        self.min = self.min.min(cwnd);
        self.max = self.max.max(cwnd);
    }

    fn finish(mut self, end: SimTime) -> CwndStats {
        let cur = self.current;
        self.update(end.max(self.last), cur);
        let span = (self.last - self.start).0;
        let mean = if span == 0 {
            cur as f64
        } else {
            self.area as f64 / span as f64
        };
        CwndStats {
            from: self.start,
            min: self.min,
            max: self.max,
            mean,
        }
    }
}

#[derive(Debug)]
struct CwndTracker {
    rwnd: u64,
    full: CwndAccum,
    post_ramp: Option<CwndAccum>,
}

impl CwndTracker {
    fn observe(&mut self, t: SimTime, cwnd: u64, halved: bool) {
        self.full.update(t, cwnd);
        match &mut self.post_ramp {
            Some(acc) => acc.update(t, cwnd),
            None if halved || cwnd >= self.rwnd => {
                self.post_ramp = Some(CwndAccum::new(t, cwnd));
            }
            None => {}
        }
    }
}

pub struct Simulation {
    cfg: ScenarioConfig,
    opts: RunOptions,
    end: SimTime,
    now: SimTime,
    events: EventQueue,
    links: [Link; 4],
    controller: Controller,
    state: CongestionState,
    rto: RtoEstimator,
    link_mode: LinkMode,
    setup_snr: Option<f64>,
    packets: PacketWindow,
    in_flight_bytes: u64,
    pending_retransmit: VecDeque<u64>,
    pace_interval: Option<SimTime>,
    received: Vec<bool>,
    totals: Totals,
    next_transmission: u64,
    throughput: ThroughputWindow,
    cwnd_tracker: CwndTracker,
    trace: Vec<TraceRecord>,
    transmissions: Vec<TransmissionRecord>,
}

impl Simulation {
    pub fn new(cfg: &ScenarioConfig, opts: RunOptions) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let cfg = cfg.clone();
        let state = CongestionState::new(cfg.mss, cfg.rwnd)
            .map_err(|e| ConfigError::new("rwnd_bytes", e.to_string()))?;
        let forward = |spec: &super::config::LinkSpec, stream| {
            Link::new(
                spec.bandwidth_bps,
                SimTime::from_secs_f64(spec.propagation_s),
                Some(spec.queue_capacity),
                spec.error_loss_rate,
                loss_rng(cfg.seed, stream),
            )
        };
        // reverse path: lossless, unbounded FIFO
        let reverse = |spec: &super::config::LinkSpec, stream| {
            Link::new(
                spec.bandwidth_bps,
                SimTime::from_secs_f64(spec.propagation_s),
                None,
                0.0,
                loss_rng(cfg.seed, stream),
            )
        };
        let links = [
            forward(&cfg.link_c_ri, 0),
            forward(&cfg.link_ri_r, 1),
            reverse(&cfg.link_ri_r, 2),
            reverse(&cfg.link_c_ri, 3),
        ];
        let pace_interval = match cfg.load {
            LoadMode::Bulk => None,
            LoadMode::Paced { pps } => Some(SimTime::from_secs_f64(1.0 / pps).max(SimTime(1))),
        };
        let mut events = EventQueue::new();
        events.schedule(SimTime::ZERO, EventKind::SendWindow);

        Ok(Simulation {
            end: SimTime::from_secs_f64(cfg.duration_s),
            now: SimTime::ZERO,
            events,
            links,
            controller: cfg.controller(),
            rto: RtoEstimator::new(cfg.rto_initial_s, cfg.srtt_weight, cfg.rto_min_s),
            link_mode: cfg.link_ri_r.link_mode,
            setup_snr: cfg.link_ri_r.snr_db,
            packets: PacketWindow::default(),
            in_flight_bytes: 0,
            pending_retransmit: VecDeque::new(),
            pace_interval,
            received: Vec::new(),
            totals: Totals::default(),
            next_transmission: 0,
            throughput: ThroughputWindow::default(),
            cwnd_tracker: CwndTracker {
                rwnd: cfg.rwnd,
                full: CwndAccum::new(SimTime::ZERO, state.cwnd()),
                post_ramp: None,
            },
            state,
            trace: Vec::new(),
            transmissions: Vec::new(),
            opts,
            cfg,
        })
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn congestion_state(&self) -> &CongestionState {
        &self.state
    }

    pub fn totals(&self) -> &Totals {
        &self.totals
    }

    /// Executes the next event due at or before the end of the run and
    /// returns it.
    pub fn step(&mut self) -> Option<Event> {
        if self.events.peek_time()? > self.end {
            return None;
        }
        let ev = self.events.pop()?;
        self.now = ev.time;
        self.dispatch(ev.kind);
        Some(ev)
    }

    pub fn run(mut self) -> RunResult {
        while self.step().is_some() {}
        self.finish()
    }

    fn dispatch(&mut self, kind: EventKind) {
        match kind {
            EventKind::SendWindow => match self.pace_interval {
                Some(interval) => {
                    self.paced_slot();
                    self.events
                        .schedule(self.now + interval, EventKind::SendWindow);
                }
                None => self.fill_window(),
            },
            EventKind::LinkArrival { link, segment } => match link {
                LinkId::ClientToRouter => self.offer(LinkId::RouterToReceiver, segment),
                LinkId::RouterToReceiver => self.deliver(segment),
                LinkId::ReceiverToRouter => self.offer(LinkId::RouterToClient, segment),
                LinkId::RouterToClient => self.on_ack(segment),
            },
            EventKind::QueueDequeue { link } => {
                let l = &mut self.links[link.index()];
                l.set_busy(false);
                if let Some(seg) = l.next_queued() {
                    self.start_transmission(link, seg);
                }
            }
            EventKind::AckArrival { segment } => self.on_ack(segment),
            EventKind::Timeout {
                packet,
                transmit_count,
            } => self.on_timeout(packet, transmit_count),
        }
    }

    fn record(&mut self, event: TraceEvent, seq: u64) {
        if !self.opts.record_trace {
            return;
        }
        let throughput_bps = self.throughput.at(self.now);
        self.trace.push(TraceRecord {
            time: self.now,
            cwnd: self.state.cwnd(),
            event,
            seq,
            throughput_bps,
        });
    }

    fn offer(&mut self, link: LinkId, seg: Segment) {
        match self.links[link.index()].offer(seg) {
            Offer::Idle(seg) => self.start_transmission(link, seg),
            Offer::Queued => {}
            Offer::QueueFull(seg) => {
                self.totals.queue_drops += 1;
                self.record(TraceEvent::QueueDrop, seg.packet);
            }
        }
    }

    fn start_transmission(&mut self, link: LinkId, seg: Segment) {
        let mut next = Some(seg);
        while let Some(seg) = next {
            let l = &mut self.links[link.index()];
            if l.corrupts(&seg) {
                next = l.next_queued();
                self.totals.error_drops += 1;
                self.record(TraceEvent::ErrorDrop, seg.packet);
                continue;
            }
            l.set_busy(true);
            let done = self.now + l.serialization(&seg);
            let arrive = done + l.propagation;
            self.events.schedule(done, EventKind::QueueDequeue { link });
            let kind = if link == LinkId::RouterToClient {
                EventKind::AckArrival { segment: seg }
            } else {
                EventKind::LinkArrival { link, segment: seg }
            };
            self.events.schedule(arrive, kind);
            return;
        }
    }

    fn deliver(&mut self, seg: Segment) {
        self.totals.packets_delivered += 1;
        let idx = seg.packet as usize;
        if self.received.len() <= idx {
            self.received.resize(idx + 1, false);
        }
        if !self.received[idx] {
            self.received[idx] = true;
            self.totals.unique_delivered += 1;
        }
        if let Some(t) = self.transmissions.get_mut(seg.transmission as usize) {
            t.recv_time.get_or_insert(self.now);
        }
        if self.opts.record_trace {
            self.throughput.add(self.now, u64::from(seg.size) * 8);
        }
        self.record(TraceEvent::Deliver, seg.packet);
        let ack = Segment {
            kind: SegmentKind::Ack,
            size: ACK_SIZE_BYTES,
            ..seg
        };
        self.offer(LinkId::ReceiverToRouter, ack);
    }

    fn on_ack(&mut self, seg: Segment) {
        if let Some(t) = self.transmissions.get_mut(seg.transmission as usize) {
            t.ack_time.get_or_insert(self.now);
        }
        let now = self.now;
        let Some(p) = self.packets.get_mut(seg.packet) else {
            return;
        };
        if p.acked {
            return;
        }
        p.acked = true;
        let (size, sample) = (
            u64::from(p.size),
            (p.transmit_count == 1).then(|| (now - p.first_send).as_secs_f64()),
        );
        self.in_flight_bytes -= size;
        // Karn: only unambiguous samples
        if let Some(rtt) = sample {
            self.rto.on_sample(rtt);
        }
        self.state = self.state.on_ack();
        self.cwnd_tracker.observe(now, self.state.cwnd(), false);
        self.record(TraceEvent::Ack, seg.packet);
        self.packets.release_acked();
        if self.pace_interval.is_none() {
            self.fill_window();
        }
    }

    fn on_timeout(&mut self, id: u64, transmit_count: u32) {
        let Some(p) = self.packets.get_mut(id) else {
            return;
        };
        if p.acked || p.transmit_count != transmit_count {
            return;
        }
        let mode = decode_header(&p.header)
            .expect("sender headers are well-formed")
            .link_mode();
        self.totals.timeouts += 1;
        self.record(TraceEvent::Timeout, id);

        let snr = match self.cfg.snr_sampling {
            SnrSampling::AtSetup => self.setup_snr,
            SnrSampling::PerTimeout => self.cfg.link_ri_r.snr_db,
        };
        let (state, decision) = self
            .controller
            .on_timeout(self.state, mode, snr)
            .expect("wireless scenarios carry an SNR");
        self.state = state;
        if decision == TimeoutDecision::HalveWindow {
            self.cwnd_tracker.observe(self.now, self.state.cwnd(), true);
            self.record(TraceEvent::Halve, id);
        }
        self.pending_retransmit.push_back(id);
        if self.pace_interval.is_none() {
            self.fill_window();
        }
    }

    fn window_has_room(&self) -> bool {
        self.in_flight_bytes + u64::from(self.cfg.packet_size) <= self.state.effective_window()
    }

    fn fill_window(&mut self) {
        while let Some(id) = self.pending_retransmit.pop_front() {
            self.retransmit(id);
        }
        while self.window_has_room() {
            self.send_new();
        }
    }

    fn paced_slot(&mut self) {
        while let Some(id) = self.pending_retransmit.pop_front() {
            if self.retransmit(id) {
                return;
            }
        }
        if self.window_has_room() {
            self.send_new();
        }
    }

    fn build_header(&self, id: u64) -> [u8; HEADER_LEN] {
        let seq_number = (id.wrapping_mul(self.cfg.mss) & u64::from(u32::MAX)) as u32;
        let h = TcpHeader {
            source_port: SENDER_PORT,
            dest_port: RECEIVER_PORT,
            seq_number,
            window: self.cfg.rwnd.min(u64::from(u16::MAX)) as u16,
            flags: TcpFlags {
                ack: true,
                psh: true,
                ..TcpFlags::default()
            },
            ..TcpHeader::default()
        };
        let h = set_link_mode(h, self.link_mode);
        // zero payload adds nothing to the sum; only the length matters
        let seg_len = self.cfg.packet_size.max(HEADER_LEN as u32) as u16;
        encode_with_checksum(&h, &[], &pseudo_header(seg_len)).expect("valid header")
    }

    fn send_new(&mut self) {
        let id = self.packets.next_id();
        let header = self.build_header(id);
        self.packets.push(Packet {
            size: self.cfg.packet_size,
            header,
            first_send: self.now,
            transmit_count: 0,
            acked: false,
        });
        self.in_flight_bytes += u64::from(self.cfg.packet_size);
        self.transmit(id);
    }

    /// Returns false when the packet was acknowledged while waiting.
    fn retransmit(&mut self, id: u64) -> bool {
        match self.packets.get_mut(id) {
            Some(p) if !p.acked => {}
            _ => return false,
        }
        self.totals.retransmissions += 1;
        self.record(TraceEvent::Retransmit, id);
        self.transmit(id);
        true
    }

    fn transmit(&mut self, id: u64) {
        let now = self.now;
        let p = self.packets.get_mut(id).expect("outstanding packet");
        p.transmit_count += 1;
        let (transmit_count, size) = (p.transmit_count, p.size);

        let transmission = self.next_transmission;
        self.next_transmission += 1;
        self.totals.packets_sent += 1;
        if self.opts.record_transmissions {
            self.transmissions.push(TransmissionRecord {
                seq: id,
                send_time: now,
                recv_time: None,
                ack_time: None,
                size,
            });
        }
        let rto = SimTime::from_secs_f64(self.rto.rto());
        self.events.schedule(
            now + rto,
            EventKind::Timeout {
                packet: id,
                transmit_count,
            },
        );
        self.offer(
            LinkId::ClientToRouter,
            Segment {
                kind: SegmentKind::Data,
                packet: id,
                transmission,
                size,
            },
        );
    }

    /// Data copies still queued at a link or on the wire.
    fn data_in_network(&self) -> u64 {
        let queued = self
            .links
            .iter()
            .flat_map(|l| l.queued())
            .filter(|s| s.kind == SegmentKind::Data)
            .count();
        let travelling = self
            .events
            .iter()
            .filter(|e| {
                matches!(
                    e.kind,
                    EventKind::LinkArrival { segment, .. } if segment.kind == SegmentKind::Data
                )
            })
            .count();
        (queued + travelling) as u64
    }

    fn finish(mut self) -> RunResult {
        self.totals.halvings = self.state.halve_count();
        self.totals.in_flight_at_end = self.data_in_network();
        let end = self.end;
        let cwnd_full = self.cwnd_tracker.full.finish(end);
        let cwnd = self
            .cwnd_tracker
            .post_ramp
            .map(|a| a.finish(end))
            .unwrap_or(cwnd_full);
        let duration = self.cfg.duration_s;
        let delivered_bits =
            self.totals.packets_delivered as f64 * f64::from(self.cfg.packet_size) * 8.0;
        RunResult {
            controller: self.controller.name(),
            duration_s: duration,
            trace: self.trace,
            transmissions: self.transmissions,
            totals: self.totals,
            goodput_pps: measure_goodput(self.totals.unique_delivered, duration)
                .expect("duration validated"),
            throughput_bps: delivered_bits / duration,
            cwnd,
            cwnd_full,
            final_cwnd: self.state.cwnd(),
            max_router_queue: self.links[LinkId::RouterToReceiver.index()].max_occupancy,
            router_queue_capacity: self.cfg.link_ri_r.queue_capacity,
        }
    }
}
