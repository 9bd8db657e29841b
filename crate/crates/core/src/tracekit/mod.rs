//! Survey counters in, per-node channel occupancy traces out.
//!
//! A node's channel occupancy (CO) for one window is the share of that window
//! during which it sensed the medium busy because of networks other than its
//! own. It is computed from three counters the wireless card reports per
//! window: time active, time the medium was sensed busy and time spent
//! transmitting. Transmissions of the other members of the node's own network
//! are subtracted from the busy counter; what remains is foreign airtime.

mod busy_trace;
mod derive;
mod survey;
mod synth;

use alloc::string::String;

use crate::NodeId;

pub use busy_trace::{read_busy_trace, write_busy_trace, BusyTrace, Occupancy, BUSY_TRACE_HEADER};
pub use derive::{
    compute_channel_occupancy, derive_busy_other, derive_busy_trace, NetworkMembership,
};
pub use survey::{parse_survey_log, write_survey_log, SurveySample, SURVEY_HEADER};
pub use synth::{synth_staircase, StaircaseParams};

/// Nominal survey window, in milliseconds.
pub const DEFAULT_WINDOW_MS: u32 = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TraceError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: node {node}: counter invariant violated: {detail}")]
    CounterInvariant { line: usize, node: NodeId, detail: String },
    #[error("line {line}: node {node}: window_start {window_start} is not after the previous window")]
    NonMonotonicWindow { line: usize, node: NodeId, window_start: u64 },
    #[error("line {line}: window_start {window_start} is not a multiple of {window_ms} ms")]
    MisalignedWindow { line: usize, window_start: u64, window_ms: u32 },
    #[error("window starting at {window_start_ms} ms: no survey sample for node {node}")]
    MissingMember { window_start_ms: u64, node: NodeId },
    #[error("window {window}: no survey sample for member node {node}")]
    MissingSample { window: u64, node: NodeId },
    #[error("line {line}: occupancy {value} outside [0, 1]")]
    OccupancyOutOfRange { line: usize, value: f64 },
    #[error("line {line}: window index {window} is not strictly increasing")]
    NonIncreasingWindow { line: usize, window: u64 },
    #[error("invalid staircase: {0}")]
    InvalidStaircase(&'static str),
    #[error("invalid membership: {0}")]
    InvalidMembership(&'static str),
    #[error("window length must be positive")]
    ZeroWindow,
}

/// Splits text into numbered, non-empty lines (1-based numbers). A trailing
/// `\r` is tolerated.
fn numbered_lines(input: &str) -> impl Iterator<Item = (usize, &str)> {
    input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}
