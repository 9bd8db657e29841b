use alloc::format;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use super::{numbered_lines, TraceError};
use crate::NodeId;

pub const BUSY_TRACE_HEADER: &str = "window,co";

const PPM: u32 = 1_000_000;

/// A channel occupancy fraction held in parts per million.
///
/// Six decimal digits is the resolution of the busy-trace format, so a value
/// that went through a file comes back bit-identical.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occupancy(u32);

impl Occupancy {
    pub const ZERO: Occupancy = Occupancy(0);
    pub const FULL: Occupancy = Occupancy(PPM);

    /// `None` when `ppm` exceeds one million.
    pub const fn from_ppm(ppm: u32) -> Option<Self> {
        if ppm <= PPM {
            Some(Occupancy(ppm))
        } else {
            None
        }
    }

    /// Rounds to the nearest millionth. `None` for values outside `[0, 1]`
    /// and for NaN.
    pub fn from_fraction(value: f64) -> Option<Self> {
        if !(0.0..=1.0).contains(&value) {
            return None;
        }
        Some(Occupancy(libm::round(value * f64::from(PPM)) as u32))
    }

    /// Like [`Occupancy::from_fraction`] but saturating at both ends.
    pub fn saturating_from_fraction(value: f64) -> Self {
        if value.is_nan() || value <= 0.0 {
            Occupancy::ZERO
        } else if value >= 1.0 {
            Occupancy::FULL
        } else {
            Occupancy(libm::round(value * f64::from(PPM)) as u32)
        }
    }

    pub const fn ppm(self) -> u32 {
        self.0
    }

    pub fn fraction(self) -> f64 {
        f64::from(self.0) / f64::from(PPM)
    }
}

impl fmt::Display for Occupancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:06}", self.0 / PPM, self.0 % PPM)
    }
}

/// Per-node occupancy time series, one sample per window.
///
/// Window indices are strictly increasing; gaps are allowed and read as zero
/// occupancy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BusyTrace {
    node_id: NodeId,
    window_ms: u32,
    samples: Vec<(u64, Occupancy)>,
}

impl BusyTrace {
    pub fn new(node_id: NodeId, window_ms: u32) -> Result<Self, TraceError> {
        if window_ms == 0 {
            return Err(TraceError::ZeroWindow);
        }
        Ok(BusyTrace {
            node_id,
            window_ms,
            samples: Vec::new(),
        })
    }

    /// Builds a dense trace starting at window 0.
    pub fn from_levels(
        node_id: NodeId,
        window_ms: u32,
        levels: impl IntoIterator<Item = Occupancy>,
    ) -> Result<Self, TraceError> {
        let mut trace = Self::new(node_id, window_ms)?;
        trace.samples = levels
            .into_iter()
            .enumerate()
            .map(|(i, co)| (i as u64, co))
            .collect();
        Ok(trace)
    }

    /// Appends a sample; `window` must be past the last one.
    pub fn push(&mut self, window: u64, co: Occupancy) -> Result<(), TraceError> {
        if let Some(&(last, _)) = self.samples.last() {
            if window <= last {
                return Err(TraceError::NonIncreasingWindow { line: 0, window });
            }
        }
        self.samples.push((window, co));
        Ok(())
    }

    pub fn node_id(&self) -> NodeId {
        self.node_id
    }

    pub fn with_node_id(mut self, node_id: NodeId) -> Self {
        self.node_id = node_id;
        self
    }

    pub fn window_ms(&self) -> u32 {
        self.window_ms
    }

    pub fn samples(&self) -> &[(u64, Occupancy)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Occupancy of one window; zero when the window has no sample.
    pub fn at_window(&self, window: u64) -> Occupancy {
        self.samples
            .binary_search_by_key(&window, |&(w, _)| w)
            .map(|i| self.samples[i].1)
            .unwrap_or(Occupancy::ZERO)
    }

    /// Occupancy of the window containing `t_us` microseconds.
    pub fn at_time_us(&self, t_us: u64) -> Occupancy {
        self.at_window(t_us / (u64::from(self.window_ms) * 1000))
    }

    /// Occupancy values as fractions, window gaps included as zeros.
    pub fn dense_fractions(&self) -> Vec<f64> {
        let Some(&(last, _)) = self.samples.last() else {
            return Vec::new();
        };
        (0..=last).map(|w| self.at_window(w).fraction()).collect()
    }
}

/// Writes `window,co` rows with six decimals. An empty trace yields only the
/// header.
pub fn write_busy_trace<W: Write>(trace: &BusyTrace, out: &mut W) -> fmt::Result {
    out.write_str(BUSY_TRACE_HEADER)?;
    out.write_char('\n')?;
    for (w, co) in &trace.samples {
        writeln!(out, "{w},{co}")?;
    }
    Ok(())
}

/// Reads a busy-trace CSV. The file does not carry node id or window length,
/// so the caller supplies them.
pub fn read_busy_trace(input: &str, node_id: NodeId, window_ms: u32) -> Result<BusyTrace, TraceError> {
    let mut trace = BusyTrace::new(node_id, window_ms)?;
    for (n, (line, text)) in numbered_lines(input).enumerate() {
        if n == 0 && text.trim() == BUSY_TRACE_HEADER {
            continue;
        }
        let (w, co) = text.split_once(',').ok_or_else(|| TraceError::Malformed {
            line,
            reason: format!("expected `window,co`, found {text:?}"),
        })?;
        let window: u64 = w.trim().parse().map_err(|_| TraceError::Malformed {
            line,
            reason: format!("window index {:?} is not a non-negative integer", w.trim()),
        })?;
        let value: f64 = co.trim().parse().map_err(|_| TraceError::Malformed {
            line,
            reason: format!("occupancy {:?} is not a number", co.trim()),
        })?;
        let co = Occupancy::from_fraction(value)
            .ok_or(TraceError::OccupancyOutOfRange { line, value })?;
        trace.push(window, co).map_err(|_| TraceError::NonIncreasingWindow { line, window })?;
    }
    Ok(trace)
}
