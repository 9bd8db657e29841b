use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use crate::NodeId;

pub type TxId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// `node` puts the frame at the head of its queue (or an ACK) on air.
    TxStart { node: NodeId, ack_for: Option<TxId> },
    TxEnd { tx: TxId },
    /// The destination decides whether `tx` was received.
    RxDecide { tx: TxId },
    AckTimeout { node: NodeId, generation: u64 },
    BackoffExpire { node: NodeId, generation: u64 },
    /// A sender-gate deferral is over.
    DeferEnd { node: NodeId, generation: u64 },
    AppEnqueue { flow: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub time_us: u64,
    pub seq: u64,
    pub kind: EventKind,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap
        (other.time_us, other.seq).cmp(&(self.time_us, self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Pops events in `(time, insertion order)` order.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time_us: u64, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event { time_us, seq, kind });
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }

    pub fn peek_time(&self) -> Option<u64> {
        self.heap.peek().map(|e| e.time_us)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
