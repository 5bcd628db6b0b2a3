use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::sim::packet::Packet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EventKind {
    ThreadStart {
        peer: usize,
        thread: usize,
    },
    /// `releases` is false for requests, which pass the link without holding it.
    UplinkServiceDone {
        peer: usize,
        pkt: Packet,
        releases: bool,
    },
    DownlinkServiceDone {
        peer: usize,
        pkt: Packet,
        releases: bool,
    },
    /// Packet leaves the core and joins `pkt.dst`'s downlink queue.
    CoreArrival {
        pkt: Packet,
    },
    TimerFired {
        peer: usize,
        thread: usize,
        request_id: u64,
    },
}

#[derive(Clone, Copy, Debug)]
pub struct Event {
    pub time: f64,
    pub sequence: u64,
    pub kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.sequence.cmp(&self.sequence))
    }
}

/// Min-queue on `(time, sequence)`; `sequence` is the insertion counter.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time: f64, kind: EventKind) {
        let sequence = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event {
            time,
            sequence,
            kind,
        });
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
}
