//! Reading and writing the text formats on disk.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chanocc_core::occupancy::{write_decision_log, GateRecord, OccupancyRegistry};
use chanocc_core::sim::{FlowStats, ThroughputSeries};
use chanocc_core::tracekit::{self, BusyTrace, SurveySample};
use chanocc_core::NodeId;

use crate::error::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_survey_file(path: &Path, window_ms: u32) -> Result<Vec<SurveySample>> {
    tracekit::parse_survey_log(&read_text(path)?, window_ms).map_err(|source| Error::Trace {
        path: path.to_owned(),
        source,
    })
}

pub fn survey_csv(samples: &[SurveySample]) -> String {
    let mut s = String::new();
    tracekit::write_survey_log(samples, &mut s).expect("writing to a String");
    s
}

pub fn busy_trace_csv(trace: &BusyTrace) -> String {
    let mut s = String::new();
    tracekit::write_busy_trace(trace, &mut s).expect("writing to a String");
    s
}

pub fn read_busy_trace_file(path: &Path, node: NodeId, window_ms: u32) -> Result<BusyTrace> {
    tracekit::read_busy_trace(&read_text(path)?, node, window_ms).map_err(|source| Error::Trace {
        path: path.to_owned(),
        source,
    })
}

pub fn write_busy_trace_file(path: &Path, trace: &BusyTrace) -> Result<()> {
    write_text(path, &busy_trace_csv(trace))
}

/// Loads one busy trace per node. Failures name the node they belong to.
pub fn load_registry(filenames: &BTreeMap<NodeId, PathBuf>, window_ms: u32) -> Result<OccupancyRegistry> {
    let mut registry = OccupancyRegistry::new();
    for (&node, path) in filenames {
        let trace = read_busy_trace_file(path, node, window_ms).map_err(|e| Error::NodeTrace {
            node,
            source: Box::new(e),
        })?;
        registry.insert(node, path.display().to_string(), trace);
    }
    Ok(registry)
}

pub fn throughput_csv(series: &[ThroughputSeries]) -> String {
    let mut s = String::from("flow,interval,mbps\n");
    for ts in series {
        for (i, v) in ts.mbps.iter().enumerate() {
            writeln!(s, "{},{},{:.6}", ts.flow, i, v).unwrap();
        }
    }
    s
}

/// Parses `flow,interval,mbps` back into per-flow series (1000 ms intervals).
pub fn parse_throughput_csv(text: &str, path: &Path) -> Result<Vec<ThroughputSeries>> {
    let bad = |line: usize, why: &str| Error::Scenario {
        path: path.to_owned(),
        message: format!("line {line}: {why}"),
    };
    let mut out: Vec<ThroughputSeries> = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let [flow, _interval, mbps] = parts[..] else {
            return Err(bad(i + 1, "expected flow,interval,mbps"));
        };
        let flow: u32 = flow.parse().map_err(|_| bad(i + 1, "bad flow id"))?;
        let mbps: f64 = mbps.parse().map_err(|_| bad(i + 1, "bad mbps"))?;
        match out.iter_mut().find(|s| s.flow == flow) {
            Some(s) => s.mbps.push(mbps),
            None => out.push(ThroughputSeries { flow, interval_ms: 1000, mbps: vec![mbps] }),
        }
    }
    Ok(out)
}

pub fn summary_csv(series: &[ThroughputSeries], stats: &[FlowStats]) -> String {
    let mut s = String::from("flow,mean_mbps,enqueued,acked,delivered,dropped_retry,dropped_blocked,pending\n");
    for (ts, st) in series.iter().zip(stats) {
        writeln!(
            s,
            "{},{:.6},{},{},{},{},{},{}",
            ts.flow,
            ts.mean().unwrap_or(0.0),
            st.enqueued,
            st.acked,
            st.delivered,
            st.dropped_retry,
            st.dropped_blocked,
            st.pending
        )
        .unwrap();
    }
    s
}

pub fn decisions_csv(records: &[GateRecord]) -> String {
    let mut s = String::new();
    write_decision_log(records, &mut s).expect("writing to a String");
    s
}

/// Per-second SNR samples: header `second,snr_db`, rows in second order.
pub fn read_snr_trace(path: &Path) -> Result<Vec<f64>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line == "second,snr_db") {
            continue;
        }
        let value = line
            .split_once(',')
            .and_then(|(_, v)| v.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Scenario {
                path: path.to_owned(),
                message: format!("line {}: expected `second,snr_db`", i + 1),
            })?;
        out.push(value);
    }
    Ok(out)
}
