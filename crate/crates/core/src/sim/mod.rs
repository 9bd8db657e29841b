//! Deterministic discrete-event simulation of a single-channel 802.11a
//! network with occupancy reproduction.

mod chain;
mod config;
mod engine;
mod event;
mod mac;
mod meter;
mod phy;
mod survey;

pub use chain::{FreeSpace, InterferenceLoss, LinkQualityModel, LossChain, LossElement, Propagation};
pub use config::{
    BlockedPolicy, FlowConfig, NodeConfig, OccupancyConfig, PhyConfig, ScenarioConfig, TrafficModel,
};
pub use engine::{run_scenario, FlowStats, ScenarioOutput, Simulator};
pub use event::{Event, EventKind, EventQueue, TxId};
pub use mac::{MacState, NodeState, RetryOutcome};
pub use meter::{meter, Delivery, ThroughputSeries};
pub use phy::{airtime, decode, Dot11aParams, Frame, Rate, SnrThresholds};
pub use survey::SurveyRecorder;

use crate::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("unsupported 802.11a rate: {0} Mbit/s")]
    UnsupportedRate(u32),
    #[error("payload of {payload} bytes exceeds the {mtu}-byte MTU")]
    PayloadTooLarge { payload: u32, mtu: u32 },
    #[error("the interference element must be the last element of the loss chain")]
    InterferenceNotLast,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("invalid scenario: {0}")]
    Config(&'static str),
}
