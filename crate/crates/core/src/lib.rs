//! Trace-driven reproduction of wireless channel occupancy.
//!
//! The crate is `no_std` and only needs `alloc`. It contains three layers:
//!
//! * [`tracekit`] turns per-window survey counters into per-node channel
//!   occupancy traces, reads and writes the busy-trace text format and
//!   synthesizes staircase patterns.
//! * [`occupancy`] holds the occupancy registry, the seeded random streams
//!   and the two gating rules (receiver-side interference loss and the
//!   sender-side transmission gate).
//! * [`sim`] is a deterministic discrete-event simulator of a single-channel
//!   802.11a network that consults both gates.
//!
//! File IO, scenario files and the command line live in the `chanocc` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod occupancy;
pub mod sim;
pub mod tracekit;

/// Identifier of a simulated node.
pub type NodeId = u32;

pub use occupancy::{GateDecision, GateOutcome, OccupancyRegistry, RandomStream};
pub use tracekit::{BusyTrace, NetworkMembership, Occupancy, SurveySample};
