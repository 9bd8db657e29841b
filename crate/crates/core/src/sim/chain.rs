//! Ordered propagation loss chain.
//!
//! Each element maps an input power to an output power for one
//! (frame, receiver) pair. Link-quality and geometric elements act as
//! attenuations; the interference element draws against the receiver's
//! occupancy and, when blocked, replaces the power with the −1000 dBm
//! sentinel. Placing that element last means no later element can lift a
//! blocked frame back above the decode threshold.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::phy::Frame;
use super::SimError;
use crate::occupancy::{receiver_rx_power, GateDecision, GateOutcome, OccupancyRegistry, RandomStream, StreamKind};
use crate::NodeId;

/// Received SNR as seen by the receiver, before interference gating.
#[derive(Debug, Clone, PartialEq)]
pub enum LinkQualityModel {
    FixedSnr { snr_db: f64 },
    /// Per-second SNR samples per directed link `(src, dst)`. Past the last
    /// sample the last value holds; links without samples use `fallback_snr_db`.
    SnrTrace {
        links: BTreeMap<(NodeId, NodeId), Vec<f64>>,
        fallback_snr_db: f64,
    },
}

impl LinkQualityModel {
    pub fn snr_db(&self, src: NodeId, dst: NodeId, t_us: u64) -> f64 {
        match self {
            LinkQualityModel::FixedSnr { snr_db } => *snr_db,
            LinkQualityModel::SnrTrace { links, fallback_snr_db } => match links.get(&(src, dst)) {
                Some(samples) if !samples.is_empty() => {
                    let second = (t_us / 1_000_000) as usize;
                    samples[second.min(samples.len() - 1)]
                }
                _ => *fallback_snr_db,
            },
        }
    }
}

/// Free-space (Friis) path loss between node positions.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeSpace {
    pub frequency_hz: f64,
    pub positions: BTreeMap<NodeId, [f64; 3]>,
    /// Below this distance no loss is applied.
    pub min_distance_m: f64,
}

impl FreeSpace {
    pub fn loss_db(&self, src: NodeId, dst: NodeId) -> f64 {
        let origin = [0.0; 3];
        let a = self.positions.get(&src).unwrap_or(&origin);
        let b = self.positions.get(&dst).unwrap_or(&origin);
        let d = libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum());
        if d <= self.min_distance_m {
            return 0.0;
        }
        const C: f64 = 299_792_458.0;
        20.0 * libm::log10(4.0 * core::f64::consts::PI * d * self.frequency_hz / C)
    }
}

/// Receiver-side interference element with one random stream per receiver.
#[derive(Debug, Clone)]
pub struct InterferenceLoss {
    registry: OccupancyRegistry,
    seed: u64,
    streams: BTreeMap<NodeId, RandomStream>,
}

impl InterferenceLoss {
    pub fn new(registry: OccupancyRegistry, seed: u64) -> Self {
        InterferenceLoss {
            registry,
            seed,
            streams: BTreeMap::new(),
        }
    }

    pub fn registry(&self) -> &OccupancyRegistry {
        &self.registry
    }

    fn apply(&mut self, power_dbm: f64, dst: NodeId, t_us: u64) -> (f64, GateDecision) {
        let co = self.registry.lookup(dst, t_us).fraction();
        let seed = self.seed;
        let draw = self
            .streams
            .entry(dst)
            .or_insert_with(|| RandomStream::for_node(seed, StreamKind::Receiver, dst))
            .uniform();
        let out = receiver_rx_power(power_dbm, co, draw);
        let outcome = if draw < co {
            GateOutcome::Blocked
        } else {
            GateOutcome::Forward
        };
        (out, GateDecision { outcome, draw, co })
    }
}

#[derive(Debug, Clone)]
pub enum LossElement {
    /// Attenuates so that the frame's nominal transmit power arrives at
    /// `noise_floor_dbm + snr`.
    LinkQuality {
        model: LinkQualityModel,
        noise_floor_dbm: f64,
    },
    FreeSpace(FreeSpace),
    /// Constant attenuation in dB.
    FixedLoss(f64),
    Interference(InterferenceLoss),
}

impl LossElement {
    fn is_interference(&self) -> bool {
        matches!(self, LossElement::Interference(_))
    }
}

/// Left-to-right composition of loss elements.
#[derive(Debug, Clone, Default)]
pub struct LossChain {
    elements: Vec<LossElement>,
}

/// Result of folding a frame through the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagation {
    pub rx_power_dbm: f64,
    /// Present when the chain has an interference element.
    pub interference: Option<GateDecision>,
}

impl LossChain {
    /// Builds a chain; an interference element, if any, must be the last one.
    pub fn new(elements: Vec<LossElement>) -> Result<Self, SimError> {
        let count = elements.iter().filter(|e| e.is_interference()).count();
        let last_ok = elements.last().is_some_and(LossElement::is_interference);
        if count > 1 || (count == 1 && !last_ok) {
            return Err(SimError::InterferenceNotLast);
        }
        Ok(LossChain { elements })
    }

    /// Builds a chain in any order. Only for experiments on element order.
    pub fn in_any_order(elements: Vec<LossElement>) -> Self {
        LossChain { elements }
    }

    pub fn elements(&self) -> &[LossElement] {
        &self.elements
    }

    pub fn propagate(&mut self, frame: &Frame, t_us: u64) -> Propagation {
        let mut power = frame.tx_power_dbm;
        let mut interference = None;
        for element in &mut self.elements {
            power = match element {
                LossElement::LinkQuality { model, noise_floor_dbm } => {
                    let target = *noise_floor_dbm + model.snr_db(frame.src, frame.dst, t_us);
                    power - (frame.tx_power_dbm - target)
                }
                LossElement::FreeSpace(fs) => power - fs.loss_db(frame.src, frame.dst),
                LossElement::FixedLoss(db) => power - *db,
                LossElement::Interference(model) => {
                    let (out, decision) = model.apply(power, frame.dst, t_us);
                    interference = Some(decision);
                    out
                }
            };
        }
        Propagation {
            rx_power_dbm: power,
            interference,
        }
    }
}
