//! Per-node DCF state: queue, contention window, backoff countdown, retries.

use alloc::collections::{BTreeMap, VecDeque};

use super::phy::{Dot11aParams, Frame};
use crate::occupancy::{RandomStream, StreamKind};
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacState {
    /// Nothing queued.
    Idle,
    /// Counting down (or frozen) backoff for the head-of-queue frame.
    Contending,
    /// Head frame held back by the sender gate.
    Deferring,
    Transmitting,
    AwaitingAck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Countdown {
    pub start_us: u64,
    pub expire_us: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetryOutcome {
    Retry,
    Dropped,
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: NodeId,
    pub queue: VecDeque<Frame>,
    pub state: MacState,
    pub cw: u32,
    pub retries: u32,
    pub backoff_slots: u32,
    pub(crate) countdown: Option<Countdown>,
    /// End of the last sender-gate deferral; the medium counts as busy for
    /// this node until then.
    pub(crate) deferred_until_us: u64,
    /// Bumped whenever a scheduled backoff or deferral event goes stale.
    pub(crate) generation: u64,
    pub(crate) ack_generation: u64,
    pub(crate) backoff_rng: RandomStream,
    pub(crate) sender_rng: RandomStream,
    /// Highest sequence number delivered per flow, for duplicate filtering.
    pub(crate) delivered_seq: BTreeMap<u32, u64>,
}

impl NodeState {
    pub fn new(id: NodeId, params: &Dot11aParams, seed: u64) -> Self {
        NodeState {
            id,
            queue: VecDeque::new(),
            state: MacState::Idle,
            cw: params.cw_min,
            retries: 0,
            backoff_slots: 0,
            countdown: None,
            deferred_until_us: 0,
            generation: 0,
            ack_generation: 0,
            backoff_rng: RandomStream::for_node(seed, StreamKind::Backoff, id),
            sender_rng: RandomStream::for_node(seed, StreamKind::Sender, id),
            delivered_seq: BTreeMap::new(),
        }
    }

    pub fn draw_backoff(&mut self) {
        self.backoff_slots = self.backoff_rng.up_to(self.cw);
    }

    /// Starts (or resumes) the countdown once the medium has been idle for
    /// DIFS. Returns the expiry time and the generation to tag the event with.
    pub(crate) fn start_countdown(&mut self, idle_since_us: u64, now_us: u64, params: &Dot11aParams) -> (u64, u64) {
        let start_us = (idle_since_us.max(self.deferred_until_us) + params.difs_us).max(now_us);
        let expire_us = start_us + u64::from(self.backoff_slots) * params.slot_us;
        self.countdown = Some(Countdown { start_us, expire_us });
        self.generation += 1;
        (expire_us, self.generation)
    }

    /// Freezes a running countdown because the medium turned busy at `now`.
    /// Only whole idle slots are consumed. A countdown that ends exactly now
    /// keeps running: the node transmits in the same slot.
    pub(crate) fn freeze(&mut self, now_us: u64, params: &Dot11aParams) {
        let Some(c) = self.countdown else { return };
        if c.expire_us == now_us {
            return;
        }
        let elapsed = now_us.saturating_sub(c.start_us) / params.slot_us;
        self.backoff_slots -= (elapsed as u32).min(self.backoff_slots);
        self.countdown = None;
        self.generation += 1;
    }

    pub fn on_ack(&mut self, params: &Dot11aParams) {
        self.cw = params.cw_min;
        self.retries = 0;
    }

    /// Binary exponential backoff; past the retry limit the frame is given up
    /// and the window resets.
    pub fn on_missing_ack(&mut self, params: &Dot11aParams) -> RetryOutcome {
        self.retries += 1;
        if self.retries > params.retry_limit {
            self.retries = 0;
            self.cw = params.cw_min;
            RetryOutcome::Dropped
        } else {
            self.cw = (2 * self.cw + 1).min(params.cw_max);
            RetryOutcome::Retry
        }
    }

    pub fn head(&self) -> Option<&Frame> {
        self.queue.front()
    }
}
