use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{numbered_lines, TraceError};
use crate::NodeId;

pub const SURVEY_HEADER: &str = "node,window_start_ms,active_ms,busy_total_ms,tx_ms";

/// One window of survey counters reported by one node.
///
/// `busy_total_ms` is the time the card sensed the medium busy because of
/// other transmitters (members of its own network and foreign networks alike);
/// `tx_ms` is the time it spent transmitting itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurveySample {
    pub node_id: NodeId,
    pub window_start: u64,
    pub active_ms: u32,
    pub busy_total_ms: u32,
    pub tx_ms: u32,
}

impl SurveySample {
    pub fn window_index(&self, window_ms: u32) -> u64 {
        self.window_start / u64::from(window_ms)
    }

    fn check_counters(&self, window_ms: u32) -> Result<(), alloc::string::String> {
        if self.active_ms > window_ms {
            return Err(format!("active_ms {} > window {}", self.active_ms, window_ms));
        }
        if self.busy_total_ms > self.active_ms {
            return Err(format!(
                "busy_total_ms {} > active_ms {}",
                self.busy_total_ms, self.active_ms
            ));
        }
        if self.tx_ms > self.active_ms {
            return Err(format!("tx_ms {} > active_ms {}", self.tx_ms, self.active_ms));
        }
        Ok(())
    }
}

/// Parses a raw survey CSV. The header row is optional; rows keep file order.
pub fn parse_survey_log(input: &str, window_ms: u32) -> Result<Vec<SurveySample>, TraceError> {
    if window_ms == 0 {
        return Err(TraceError::ZeroWindow);
    }
    let mut out = Vec::new();
    let mut last_window: BTreeMap<NodeId, u64> = BTreeMap::new();
    for (n, (line, text)) in numbered_lines(input).enumerate() {
        if n == 0 && text.trim() == SURVEY_HEADER {
            continue;
        }
        let sample = parse_row(line, text)?;
        if sample.window_start % u64::from(window_ms) != 0 {
            return Err(TraceError::MisalignedWindow {
                line,
                window_start: sample.window_start,
                window_ms,
            });
        }
        sample
            .check_counters(window_ms)
            .map_err(|detail| TraceError::CounterInvariant {
                line,
                node: sample.node_id,
                detail,
            })?;
        if let Some(prev) = last_window.insert(sample.node_id, sample.window_start) {
            if sample.window_start <= prev {
                return Err(TraceError::NonMonotonicWindow {
                    line,
                    node: sample.node_id,
                    window_start: sample.window_start,
                });
            }
        }
        out.push(sample);
    }
    Ok(out)
}

fn parse_row(line: usize, text: &str) -> Result<SurveySample, TraceError> {
    let fields: Vec<&str> = text.split(',').map(str::trim).collect();
    if fields.len() != 5 {
        return Err(TraceError::Malformed {
            line,
            reason: format!("expected 5 fields, found {}", fields.len()),
        });
    }
    let bad = |name: &str, v: &str| TraceError::Malformed {
        line,
        reason: format!("{name}: cannot parse {v:?} as a non-negative integer"),
    };
    let node_id = fields[0].parse().map_err(|_| bad("node", fields[0]))?;
    let window_start = fields[1].parse().map_err(|_| bad("window_start_ms", fields[1]))?;
    let active_ms = fields[2].parse().map_err(|_| bad("active_ms", fields[2]))?;
    let busy_total_ms = fields[3].parse().map_err(|_| bad("busy_total_ms", fields[3]))?;
    let tx_ms = fields[4].parse().map_err(|_| bad("tx_ms", fields[4]))?;
    Ok(SurveySample {
        node_id,
        window_start,
        active_ms,
        busy_total_ms,
        tx_ms,
    })
}

/// Writes samples in the raw survey CSV format, header included.
pub fn write_survey_log<W: Write>(samples: &[SurveySample], out: &mut W) -> core::fmt::Result {
    out.write_str(SURVEY_HEADER)?;
    out.write_char('\n')?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.node_id, s.window_start, s.active_ms, s.busy_total_ms, s.tx_ms
        )?;
    }
    Ok(())
}

impl core::fmt::Display for SurveySample {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "node {} @ {} ms (active {}, busy {}, tx {})",
            self.node_id, self.window_start, self.active_ms, self.busy_total_ms, self.tx_ms
        )
    }
}
