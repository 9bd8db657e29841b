//! Canned experiments.
//!
//! `synthetic-staircase` drives two nodes with synthesized occupancy
//! staircases: the receiver's climbs 0% to 50% in 5 s steps and drops back to
//! zero at 30 s, after which the sender's climbs the same way.
//!
//! `controlled-interference` first runs a four-node emulation in which a
//! second pair (C to D) injects traffic sized to occupy 0% to 50% of the
//! medium in 5 s steps. The survey counters of A and B from that run are
//! turned into busy traces, which then drive a two-node reproduction.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chanocc_core::sim::{run_scenario, Dot11aParams, Rate, ScenarioOutput};
use chanocc_core::tracekit::{
    self, BusyTrace, NetworkMembership, StaircaseParams, SurveySample, DEFAULT_WINDOW_MS,
};
use chanocc_core::NodeId;

use crate::error::{Error, Result};
use crate::io;
use crate::run::write_outputs;
use crate::scenario::{FlowEntry, NodeEntry, OccupancyEntry, ScenarioFile, TraceBinding, TrafficEntry};

pub const NODE_A: NodeId = 0;
pub const NODE_B: NodeId = 1;
pub const NODE_C: NodeId = 2;
pub const NODE_D: NodeId = 3;
pub const INTERFERER_FLOW: u32 = 100;
pub const INTERFERER_RATE: Rate = Rate::R12;
pub const STEP_MS: u64 = 5000;
pub const LEVELS: usize = 6;
pub const STAIRCASE_DURATION_MS: u64 = 60_000;
pub const CONTROLLED_DURATION_MS: u64 = 30_000;

macro_rules! named_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $label),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                $name::ALL.iter().copied().find(|v| v.as_str() == s).ok_or_else(|| {
                    let known: Vec<&str> = $name::ALL.iter().map(|v| v.as_str()).collect();
                    Error::Invalid(format!("unknown {} `{s}` (expected one of {})", stringify!($name), known.join(", ")))
                })
            }
        }
    };
}

named_enum!(PresetName {
    SyntheticStaircase => "synthetic-staircase",
    ControlledInterference => "controlled-interference",
});

named_enum!(Variant {
    ReceiverOnly => "receiver-only",
    SenderOnly => "sender-only",
    Both => "both",
    Baseline => "baseline",
});

named_enum!(Direction {
    AtoB => "a-b",
    BtoA => "b-a",
    Bidirectional => "bidir",
});

impl Variant {
    pub fn interference(self) -> bool {
        matches!(self, Variant::ReceiverOnly | Variant::Both)
    }

    pub fn sender_gate(self) -> bool {
        matches!(self, Variant::SenderOnly | Variant::Both)
    }
}

impl Direction {
    /// `(flow id, src, dst)` of the measured flows.
    pub fn flows(self) -> &'static [(u32, NodeId, NodeId)] {
        match self {
            Direction::AtoB => &[(0, NODE_A, NODE_B)],
            Direction::BtoA => &[(0, NODE_B, NODE_A)],
            Direction::Bidirectional => &[(0, NODE_A, NODE_B), (1, NODE_B, NODE_A)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentPreset {
    pub name: PresetName,
    pub variant: Variant,
    pub direction: Direction,
}

/// Results of one variant run.
#[derive(Debug)]
pub struct VariantRun {
    pub variant: Variant,
    pub dir: PathBuf,
    pub output: ScenarioOutput,
}

/// Everything a preset invocation produced.
#[derive(Debug)]
pub struct PresetRun {
    /// The four-node emulation (controlled interference only).
    pub reference: Option<ScenarioOutput>,
    pub variants: Vec<VariantRun>,
}

enum Traces {
    Staircase { receiver: BusyTrace, sender: BusyTrace },
    Derived(BTreeMap<NodeId, BusyTrace>),
}

pub fn run_preset(preset: ExperimentPreset, seed: u64, out_dir: &Path) -> Result<PresetRun> {
    run_variants(preset.name, &[preset.variant], preset.direction, seed, out_dir)
}

/// Runs several variants of one preset, sharing the reference emulation.
/// Each variant lands in `out_dir/<variant>/`, the emulation in
/// `out_dir/reference/`.
pub fn run_variants(
    name: PresetName,
    variants: &[Variant],
    direction: Direction,
    seed: u64,
    out_dir: &Path,
) -> Result<PresetRun> {
    let (reference, traces, duration_ms) = match name {
        PresetName::SyntheticStaircase => {
            let (receiver, sender) = staircase_traces()?;
            (None, Traces::Staircase { receiver, sender }, STAIRCASE_DURATION_MS)
        }
        PresetName::ControlledInterference => {
            let reference = emulate(direction, seed)?;
            let traces = derive_traces(&reference.survey)?;
            let dir = out_dir.join("reference");
            write_outputs(&dir, &reference)?;
            for (node, trace) in &traces {
                io::write_busy_trace_file(&dir.join(format!("traces/node{node}.csv")), trace)?;
            }
            (Some(reference), Traces::Derived(traces), CONTROLLED_DURATION_MS)
        }
    };
    let mut runs = Vec::with_capacity(variants.len());
    for &variant in variants {
        let dir = out_dir.join(variant.as_str());
        let scenario = ScenarioFile {
            duration_ms,
            seed,
            occupancy: OccupancyEntry {
                interference: variant.interference(),
                sender_gate: variant.sender_gate(),
                traces: write_bindings(&traces, direction, &dir)?,
                ..Default::default()
            },
            ..two_node_scenario(direction)
        };
        io::write_text(&dir.join("scenario.toml"), &scenario.to_toml())?;
        let output = run_scenario(&scenario.resolve(&dir)?)?;
        write_outputs(&dir, &output)?;
        runs.push(VariantRun { variant, dir, output });
    }
    Ok(PresetRun { reference, variants: runs })
}

fn two_node_scenario(direction: Direction) -> ScenarioFile {
    let mut s = ScenarioFile::parse("[[nodes]]\nid = 0\n[[nodes]]\nid = 1\n", Path::new("<preset>"))
        .expect("built-in scenario parses");
    s.flows = direction.flows().iter().map(|&(id, src, dst)| saturated(id, src, dst)).collect();
    s
}

fn saturated(id: u32, src: NodeId, dst: NodeId) -> FlowEntry {
    FlowEntry {
        id,
        src,
        dst,
        payload_bytes: 1470,
        start_ms: 0,
        stop_ms: None,
        rate_mbps: None,
        traffic: TrafficEntry::Saturated,
    }
}

/// Receiver staircase (with the return to zero) and sender staircase
/// starting where the receiver's ends.
pub fn staircase_traces() -> Result<(BusyTrace, BusyTrace)> {
    let plateau = (STEP_MS / u64::from(DEFAULT_WINDOW_MS)) as u32;
    let receiver = tracekit::synth_staircase(&StaircaseParams { plateau, ..Default::default() })?;
    let sender = tracekit::synth_staircase(&StaircaseParams {
        plateau,
        reset: false,
        offset: u64::from(plateau) * LEVELS as u64,
        ..Default::default()
    })?;
    Ok((receiver, sender))
}

/// Offered load (Mbit/s) of the interfering pair that keeps the medium busy
/// for `co` of the time: one 12 Mbit/s data frame plus its ACK per packet.
pub fn interferer_rate_mbps(co: f64) -> f64 {
    let p = Dot11aParams::default();
    let data = p.mpdu_airtime_us(p.data_mpdu_bytes(1470), INTERFERER_RATE);
    let ack = p.mpdu_airtime_us(p.ack_bytes, Rate::R24);
    co * f64::from(1470 * 8) / (data + ack) as f64
}

/// The four-node reference run: the measured flows plus the C to D
/// interferer, with survey counters recorded.
pub fn emulation_scenario(direction: Direction, seed: u64) -> ScenarioFile {
    let mut s = two_node_scenario(direction);
    s.nodes.extend([NODE_C, NODE_D].map(|id| NodeEntry { id, position: [0.0; 3] }));
    s.flows.push(FlowEntry {
        rate_mbps: Some(INTERFERER_RATE.mbps()),
        traffic: TrafficEntry::Cbr {
            step_ms: STEP_MS,
            mbps: (0..LEVELS).map(|k| interferer_rate_mbps(k as f64 * 0.1)).collect(),
        },
        ..saturated(INTERFERER_FLOW, NODE_C, NODE_D)
    });
    s.seed = seed;
    s.duration_ms = CONTROLLED_DURATION_MS;
    s.record_survey = true;
    s
}

/// Runs the emulation; the interferer's series is dropped from the result.
pub fn emulate(direction: Direction, seed: u64) -> Result<ScenarioOutput> {
    let mut out = run_scenario(&emulation_scenario(direction, seed).resolve(Path::new("."))?)?;
    out.series.retain(|s| s.flow != INTERFERER_FLOW);
    out.flows.retain(|s| s.flow != INTERFERER_FLOW);
    Ok(out)
}

/// Busy traces of A and B from survey counters, with A and B as the only
/// network members.
pub fn derive_traces(survey: &[SurveySample]) -> Result<BTreeMap<NodeId, BusyTrace>> {
    let members = NetworkMembership::new([NODE_A, NODE_B])?;
    let mut out = BTreeMap::new();
    for node in [NODE_A, NODE_B] {
        out.insert(node, tracekit::derive_busy_trace(survey, node, &members, DEFAULT_WINDOW_MS)?);
    }
    Ok(out)
}

/// Writes trace files under `dir/traces` and returns bindings for them.
///
/// Staircase: the receiver pattern sits on whichever node receives, the
/// sender pattern on whichever node sends. Derived traces cover both
/// mechanisms of their own node.
fn write_bindings(traces: &Traces, direction: Direction, dir: &Path) -> Result<Vec<TraceBinding>> {
    let mut out: Vec<TraceBinding> = Vec::new();
    let mut bind = |node: NodeId, label: &str, trace: &BusyTrace, receiver: bool, sender: bool| -> Result<()> {
        let file = PathBuf::from("traces").join(format!("{label}-node{node}.csv"));
        io::write_busy_trace_file(&dir.join(&file), &trace.clone().with_node_id(node))?;
        out.push(TraceBinding { node, file, receiver, sender });
        Ok(())
    };
    match traces {
        Traces::Staircase { receiver, sender } => {
            let flows = direction.flows();
            let mut dsts: Vec<NodeId> = flows.iter().map(|f| f.2).collect();
            let mut srcs: Vec<NodeId> = flows.iter().map(|f| f.1).collect();
            dsts.dedup();
            srcs.dedup();
            for node in dsts {
                bind(node, "receiver", receiver, true, false)?;
            }
            for node in srcs {
                bind(node, "sender", sender, false, true)?;
            }
        }
        Traces::Derived(map) => {
            for (&node, trace) in map {
                bind(node, "derived", trace, true, true)?;
            }
        }
    }
    Ok(out)
}
