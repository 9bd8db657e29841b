use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::chain::{FreeSpace, LinkQualityModel};
use super::phy::{Dot11aParams, Rate, SnrThresholds};
use super::SimError;
use crate::occupancy::OccupancyRegistry;
use crate::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct NodeConfig {
    pub id: NodeId,
    pub position: [f64; 3],
}

impl NodeConfig {
    pub fn at_origin(id: NodeId) -> Self {
        NodeConfig { id, position: [0.0; 3] }
    }
}

/// How a flow's source generates frames.
#[derive(Debug, Clone, PartialEq)]
pub enum TrafficModel {
    /// The source queue never runs dry while the flow is active.
    Saturated,
    /// Constant bit rate, changing every `step_ms`; the last rate holds.
    Cbr { step_ms: u64, mbps: Vec<f64> },
}

impl TrafficModel {
    /// Offered rate at `t_us` and when it next changes.
    pub(crate) fn cbr_rate_at(&self, t_us: u64) -> Option<(f64, Option<u64>)> {
        match self {
            TrafficModel::Saturated => None,
            TrafficModel::Cbr { step_ms, mbps } => {
                let step_us = step_ms * 1000;
                let idx = (t_us / step_us) as usize;
                let rate = mbps.get(idx).or(mbps.last()).copied().unwrap_or(0.0);
                let next = (idx + 1 < mbps.len()).then(|| (idx as u64 + 1) * step_us);
                Some((rate, next))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub id: u32,
    pub src: NodeId,
    pub dst: NodeId,
    pub payload_bytes: u32,
    pub start_ms: u64,
    /// `None` runs to the end of the scenario.
    pub stop_ms: Option<u64>,
    pub traffic: TrafficModel,
    /// Data rate for this flow; `None` uses the PHY's data rate.
    pub rate: Option<Rate>,
}

impl FlowConfig {
    pub fn saturated(id: u32, src: NodeId, dst: NodeId) -> Self {
        FlowConfig {
            id,
            src,
            dst,
            payload_bytes: 1470,
            start_ms: 0,
            stop_ms: None,
            traffic: TrafficModel::Saturated,
            rate: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhyConfig {
    pub params: Dot11aParams,
    pub data_rate: Rate,
    pub control_rate: Rate,
    pub tx_power_dbm: f64,
    pub noise_floor_dbm: f64,
    pub link: LinkQualityModel,
    /// Optional geometric element, stacked after the link-quality element.
    pub free_space: Option<FreeSpace>,
    pub thresholds: SnrThresholds,
    pub mtu_bytes: u32,
    /// Added to reception completion and to the ACK timeout. Carrier sensing
    /// stays instantaneous.
    pub propagation_delay_us: u64,
}

impl Default for PhyConfig {
    fn default() -> Self {
        PhyConfig {
            params: Dot11aParams::default(),
            data_rate: Rate::R54,
            control_rate: Rate::R24,
            tx_power_dbm: 16.0,
            noise_floor_dbm: -95.0,
            link: LinkQualityModel::FixedSnr { snr_db: 75.0 },
            free_space: None,
            thresholds: SnrThresholds::default(),
            mtu_bytes: 1500,
            propagation_delay_us: 0,
        }
    }
}

/// What a sender does with a frame the sender gate blocked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockedPolicy {
    /// Hold the frame for one data-frame airtime, then contend again.
    #[default]
    Defer,
    /// Discard the frame.
    Drop,
}

/// Occupancy reproduction toggles. `None` disables a mechanism.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OccupancyConfig {
    pub interference: Option<OccupancyRegistry>,
    pub sender_gate: Option<OccupancyRegistry>,
    pub blocked: BlockedPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub nodes: Vec<NodeConfig>,
    pub flows: Vec<FlowConfig>,
    pub phy: PhyConfig,
    pub occupancy: OccupancyConfig,
    pub seed: u64,
    pub duration_ms: u64,
    pub meter_interval_ms: u32,
    /// Frames a node may hold; CBR arrivals beyond it are discarded.
    pub queue_limit: usize,
    pub record_decisions: bool,
    pub record_survey: bool,
    pub survey_window_ms: u32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            nodes: Vec::new(),
            flows: Vec::new(),
            phy: PhyConfig::default(),
            occupancy: OccupancyConfig::default(),
            seed: 1,
            duration_ms: 10_000,
            meter_interval_ms: 1000,
            queue_limit: 400,
            record_decisions: false,
            record_survey: false,
            survey_window_ms: crate::tracekit::DEFAULT_WINDOW_MS,
        }
    }
}

impl ScenarioConfig {
    /// Two co-located nodes, 0 and 1, and no flows.
    pub fn two_nodes() -> Self {
        ScenarioConfig {
            nodes: alloc::vec![NodeConfig::at_origin(0), NodeConfig::at_origin(1)],
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id) {
                return Err(SimError::Config("duplicate node id"));
            }
        }
        if self.duration_ms == 0 {
            return Err(SimError::Config("duration must be positive"));
        }
        if self.meter_interval_ms == 0 || self.survey_window_ms == 0 {
            return Err(SimError::Config("intervals must be positive"));
        }
        if self.phy.params.cw_min == 0 || self.phy.params.cw_min > self.phy.params.cw_max {
            return Err(SimError::Config("contention window bounds are inconsistent"));
        }
        let mut flow_ids = BTreeSet::new();
        for f in &self.flows {
            if !flow_ids.insert(f.id) {
                return Err(SimError::Config("duplicate flow id"));
            }
            if !ids.contains(&f.src) || !ids.contains(&f.dst) {
                return Err(SimError::UnknownNode(if ids.contains(&f.src) { f.dst } else { f.src }));
            }
            if f.src == f.dst {
                return Err(SimError::Config("flow source and destination must differ"));
            }
            if f.payload_bytes == 0 {
                return Err(SimError::Config("payload must be positive"));
            }
            if f.payload_bytes + self.phy.params.ip_udp_overhead_bytes > self.phy.mtu_bytes {
                return Err(SimError::PayloadTooLarge {
                    payload: f.payload_bytes,
                    mtu: self.phy.mtu_bytes,
                });
            }
            if f.stop_ms.is_some_and(|stop| stop <= f.start_ms) {
                return Err(SimError::Config("flow stops before it starts"));
            }
            if let TrafficModel::Cbr { step_ms, mbps } = &f.traffic {
                if *step_ms == 0 || mbps.is_empty() {
                    return Err(SimError::Config("CBR schedule needs a positive step and at least one rate"));
                }
                if mbps.iter().any(|r| !r.is_finite() || *r < 0.0) {
                    return Err(SimError::Config("CBR rates must be finite and non-negative"));
                }
            }
        }
        for registry in [&self.occupancy.interference, &self.occupancy.sender_gate].into_iter().flatten() {
            if let Some(n) = registry.nodes().find(|n| !ids.contains(n)) {
                return Err(SimError::UnknownNode(n));
            }
        }
        Ok(())
    }
}
