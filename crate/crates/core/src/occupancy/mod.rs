//! Occupancy reproduction: a registry of busy traces, seeded random streams
//! and the two gating rules that turn a CO value into lost or deferred frames.
//!
//! The receiver side acts as the last element of the propagation loss chain:
//! with probability CO the received power collapses to [`BLOCKED_RX_DBM`] and
//! the frame cannot be decoded. The sender side sits between the MAC and the
//! PHY: with probability CO a frame that won contention is held back as if the
//! medium were taken by a foreign transmitter.

mod gate;
mod registry;
mod stream;

pub use gate::{
    receiver_rx_power, sender_gate, write_decision_log, GateDecision, GateOutcome, GateRecord,
    Mechanism, BLOCKED_RX_DBM, DECISION_LOG_HEADER,
};
pub use registry::{occupancy_at, OccupancyRegistry};
pub use stream::{RandomStream, StreamKind};
