//! TOML scenario files.
//!
//! ```toml
//! seed = 7
//! duration_ms = 10000
//!
//! [[nodes]]
//! id = 0
//!
//! [[nodes]]
//! id = 1
//! position = [5.0, 0.0, 0.0]
//!
//! [[flows]]
//! id = 0
//! src = 0
//! dst = 1
//!
//! [occupancy]
//! interference = true
//!
//! [[occupancy.traces]]
//! node = 1
//! file = "traces/b.csv"
//! ```
//!
//! Relative paths resolve against the directory holding the scenario file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chanocc_core::sim::{
    BlockedPolicy, FlowConfig, FreeSpace, LinkQualityModel, NodeConfig, OccupancyConfig, PhyConfig, Rate,
    ScenarioConfig, TrafficModel,
};
use chanocc_core::tracekit::DEFAULT_WINDOW_MS;
use chanocc_core::NodeId;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_duration")]
    pub duration_ms: u64,
    #[serde(default = "default_window")]
    pub meter_interval_ms: u32,
    #[serde(default = "default_queue")]
    pub queue_limit: usize,
    #[serde(default)]
    pub record_decisions: bool,
    #[serde(default)]
    pub record_survey: bool,
    #[serde(default = "default_window")]
    pub window_ms: u32,
    pub nodes: Vec<NodeEntry>,
    #[serde(default)]
    pub flows: Vec<FlowEntry>,
    #[serde(default)]
    pub phy: PhyEntry,
    #[serde(default)]
    pub occupancy: OccupancyEntry,
}

fn default_seed() -> u64 {
    1
}
fn default_duration() -> u64 {
    10_000
}
fn default_window() -> u32 {
    DEFAULT_WINDOW_MS
}
fn default_queue() -> usize {
    400
}
fn default_payload() -> u32 {
    1470
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: NodeId,
    #[serde(default)]
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowEntry {
    pub id: u32,
    pub src: NodeId,
    pub dst: NodeId,
    #[serde(default = "default_payload")]
    pub payload_bytes: u32,
    #[serde(default)]
    pub start_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_mbps: Option<u32>,
    #[serde(default)]
    pub traffic: TrafficEntry,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrafficEntry {
    #[default]
    Saturated,
    Cbr { step_ms: u64, mbps: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhyEntry {
    pub data_rate_mbps: u32,
    pub control_rate_mbps: u32,
    pub tx_power_dbm: f64,
    pub noise_floor_dbm: f64,
    pub mtu_bytes: u32,
    pub propagation_delay_us: u64,
    pub link: LinkEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_space: Option<FreeSpaceEntry>,
}

impl Default for PhyEntry {
    fn default() -> Self {
        let p = PhyConfig::default();
        PhyEntry {
            data_rate_mbps: p.data_rate.mbps(),
            control_rate_mbps: p.control_rate.mbps(),
            tx_power_dbm: p.tx_power_dbm,
            noise_floor_dbm: p.noise_floor_dbm,
            mtu_bytes: p.mtu_bytes,
            propagation_delay_us: p.propagation_delay_us,
            link: LinkEntry::default(),
            free_space: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinkEntry {
    FixedSnr {
        snr_db: f64,
    },
    /// Per-link files of per-second SNR samples.
    SnrTrace {
        fallback_snr_db: f64,
        traces: Vec<SnrTraceEntry>,
    },
}

impl Default for LinkEntry {
    fn default() -> Self {
        LinkEntry::FixedSnr { snr_db: 75.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrTraceEntry {
    pub src: NodeId,
    pub dst: NodeId,
    pub file: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeSpaceEntry {
    pub frequency_hz: f64,
    #[serde(default = "default_min_distance")]
    pub min_distance_m: f64,
}

fn default_min_distance() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OccupancyEntry {
    #[serde(default)]
    pub interference: bool,
    #[serde(default)]
    pub sender_gate: bool,
    #[serde(default)]
    pub blocked: BlockedEntry,
    #[serde(default)]
    pub traces: Vec<TraceBinding>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockedEntry {
    #[default]
    Defer,
    Drop,
}

/// A busy trace attached to a node for one or both mechanisms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceBinding {
    pub node: NodeId,
    pub file: PathBuf,
    #[serde(default = "default_true")]
    pub receiver: bool,
    #[serde(default = "default_true")]
    pub sender: bool,
}

impl ScenarioFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Scenario {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&io::read_text(path)?, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serialises")
    }

    /// Builds the simulator configuration, reading referenced files relative
    /// to `base`.
    pub fn resolve(&self, base: &Path) -> Result<ScenarioConfig> {
        let rate = |mbps: u32| Rate::from_mbps(mbps).map_err(Error::from);
        let at = |p: &Path| if p.is_absolute() { p.to_owned() } else { base.join(p) };

        let nodes: Vec<NodeConfig> = self.nodes.iter().map(|n| NodeConfig { id: n.id, position: n.position }).collect();
        let mut flows = Vec::with_capacity(self.flows.len());
        for f in &self.flows {
            flows.push(FlowConfig {
                id: f.id,
                src: f.src,
                dst: f.dst,
                payload_bytes: f.payload_bytes,
                start_ms: f.start_ms,
                stop_ms: f.stop_ms,
                traffic: match &f.traffic {
                    TrafficEntry::Saturated => TrafficModel::Saturated,
                    TrafficEntry::Cbr { step_ms, mbps } => TrafficModel::Cbr { step_ms: *step_ms, mbps: mbps.clone() },
                },
                rate: f.rate_mbps.map(rate).transpose()?,
            });
        }

        let p = &self.phy;
        let link = match &p.link {
            LinkEntry::FixedSnr { snr_db } => LinkQualityModel::FixedSnr { snr_db: *snr_db },
            LinkEntry::SnrTrace { fallback_snr_db, traces } => {
                let mut links = BTreeMap::new();
                for t in traces {
                    links.insert((t.src, t.dst), io::read_snr_trace(&at(&t.file))?);
                }
                LinkQualityModel::SnrTrace { links, fallback_snr_db: *fallback_snr_db }
            }
        };
        let free_space = p.free_space.as_ref().map(|fs| FreeSpace {
            frequency_hz: fs.frequency_hz,
            positions: nodes.iter().map(|n| (n.id, n.position)).collect(),
            min_distance_m: fs.min_distance_m,
        });
        let phy = PhyConfig {
            data_rate: rate(p.data_rate_mbps)?,
            control_rate: rate(p.control_rate_mbps)?,
            tx_power_dbm: p.tx_power_dbm,
            noise_floor_dbm: p.noise_floor_dbm,
            mtu_bytes: p.mtu_bytes,
            propagation_delay_us: p.propagation_delay_us,
            link,
            free_space,
            ..PhyConfig::default()
        };

        let occ = &self.occupancy;
        let mut receiver_files = BTreeMap::new();
        let mut sender_files = BTreeMap::new();
        for b in &occ.traces {
            let file = at(&b.file);
            for (wanted, map) in [(b.receiver, &mut receiver_files), (b.sender, &mut sender_files)] {
                if wanted && map.insert(b.node, file.clone()).is_some() {
                    return Err(Error::Invalid(format!("node {}: more than one trace bound to a mechanism", b.node)));
                }
            }
        }
        let occupancy = OccupancyConfig {
            interference: if occ.interference { Some(io::load_registry(&receiver_files, self.window_ms)?) } else { None },
            sender_gate: if occ.sender_gate { Some(io::load_registry(&sender_files, self.window_ms)?) } else { None },
            blocked: match occ.blocked {
                BlockedEntry::Defer => BlockedPolicy::Defer,
                BlockedEntry::Drop => BlockedPolicy::Drop,
            },
        };

        let config = ScenarioConfig {
            nodes,
            flows,
            phy,
            occupancy,
            seed: self.seed,
            duration_ms: self.duration_ms,
            meter_interval_ms: self.meter_interval_ms,
            queue_limit: self.queue_limit,
            record_decisions: self.record_decisions,
            record_survey: self.record_survey,
            survey_window_ms: self.window_ms,
        };
        config.validate()?;
        Ok(config)
    }
}
