//! Event queue ordered by `(time, tiebreak)`.
//!
//! The tiebreak is an insertion counter, so events scheduled for the same
//! instant run in the order they were scheduled.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::time::SimTime;

/// Directional link identifiers along C -> RI -> R and back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkId {
    ClientToRouter = 0,
    RouterToReceiver = 1,
    ReceiverToRouter = 2,
    RouterToClient = 3,
}

impl LinkId {
    pub const ALL: [LinkId; 4] = [
        LinkId::ClientToRouter,
        LinkId::RouterToReceiver,
        LinkId::ReceiverToRouter,
        LinkId::RouterToClient,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Data,
    Ack,
}

/// A segment copy travelling through the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub kind: SegmentKind,
    /// Packet id, which doubles as the segment number.
    pub packet: u64,
    /// Index of the data transmission this copy belongs to (ACKs inherit it).
    pub transmission: u64,
    pub size: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Sender checks its window (bulk start, or a pacing tick).
    SendWindow,
    /// A segment finished propagating over `link`.
    LinkArrival { link: LinkId, segment: Segment },
    /// The transmitter of `link` finished serializing and may start the next segment.
    QueueDequeue { link: LinkId },
    /// An ACK reached the sender.
    AckArrival { segment: Segment },
    /// Retransmission timer for `packet`, armed by its `transmit_count`-th transmission.
    Timeout { packet: u64, transmit_count: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub time: SimTime,
    pub tiebreak: u64,
    pub kind: EventKind,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap
        (other.time, other.tiebreak).cmp(&(self.time, self.tiebreak))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    next_tiebreak: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time: SimTime, kind: EventKind) {
        let tiebreak = self.next_tiebreak;
        self.next_tiebreak += 1;
        self.heap.push(Event {
            time,
            tiebreak,
            kind,
        });
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|e| e.time)
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Event> {
        self.heap.iter()
    }
}
