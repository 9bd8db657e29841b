use alloc::vec::Vec;

use super::{BusyTrace, Occupancy, TraceError};
use crate::NodeId;

/// A rising occupancy staircase: `plateau` windows at each of `start`,
/// `start + step`, ... up to `max`, optionally followed by a zero plateau.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaircaseParams {
    pub start: f64,
    pub step: f64,
    /// Windows per level.
    pub plateau: u32,
    pub max: f64,
    pub reset: bool,
    /// Index of the first window; earlier windows are absent (zero).
    pub offset: u64,
    pub node_id: NodeId,
    pub window_ms: u32,
}

impl Default for StaircaseParams {
    fn default() -> Self {
        StaircaseParams {
            start: 0.0,
            step: 0.1,
            plateau: 5,
            max: 0.5,
            reset: true,
            offset: 0,
            node_id: 0,
            window_ms: super::DEFAULT_WINDOW_MS,
        }
    }
}

impl StaircaseParams {
    /// Occupancy levels in order, reset plateau excluded.
    pub fn levels(&self) -> Result<Vec<Occupancy>, TraceError> {
        let unit = |v: f64, what: &'static str| {
            Occupancy::from_fraction(v).ok_or(TraceError::InvalidStaircase(what))
        };
        let start = unit(self.start, "start outside [0, 1]")?;
        let step = unit(self.step, "step outside [0, 1]")?;
        let max = unit(self.max, "max outside [0, 1]")?;
        if self.plateau == 0 {
            return Err(TraceError::InvalidStaircase("plateau must be at least one window"));
        }
        if start > max {
            return Err(TraceError::InvalidStaircase("start exceeds max"));
        }
        if step > max {
            return Err(TraceError::InvalidStaircase("step exceeds max"));
        }
        let mut levels = Vec::new();
        let mut level = start.ppm();
        loop {
            levels.push(Occupancy::from_ppm(level).expect("bounded by max"));
            if step.ppm() == 0 || level + step.ppm() > max.ppm() {
                break;
            }
            level += step.ppm();
        }
        Ok(levels)
    }
}

pub fn synth_staircase(params: &StaircaseParams) -> Result<BusyTrace, TraceError> {
    let mut trace = BusyTrace::new(params.node_id, params.window_ms)?;
    let mut levels = params.levels()?;
    if params.reset {
        levels.push(Occupancy::ZERO);
    }
    let mut window = params.offset;
    for co in levels {
        for _ in 0..params.plateau {
            trace.push(window, co)?;
            window += 1;
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rising_staircase_with_reset() {
        let t = synth_staircase(&StaircaseParams::default()).unwrap();
        assert_eq!(t.len(), 35);
        let expected: Vec<f64> = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.0]
            .iter()
            .flat_map(|&c| core::iter::repeat_n(c, 5))
            .collect();
        assert_eq!(t.dense_fractions(), expected);
    }

    #[test]
    fn degenerate_constant_trace() {
        let p = StaircaseParams { step: 0.0, plateau: 10, max: 0.0, reset: false, ..Default::default() };
        let t = synth_staircase(&p).unwrap();
        assert_eq!(t.dense_fractions(), [0.0; 10]);
    }

    #[test]
    fn step_beyond_max_is_rejected() {
        let p = StaircaseParams { step: 0.6, plateau: 1, max: 0.5, ..Default::default() };
        assert_eq!(synth_staircase(&p), Err(TraceError::InvalidStaircase("step exceeds max")));
        let p = StaircaseParams { max: 1.5, ..Default::default() };
        assert!(synth_staircase(&p).is_err());
        let p = StaircaseParams { step: -0.1, ..Default::default() };
        assert!(synth_staircase(&p).is_err());
        let p = StaircaseParams { plateau: 0, ..Default::default() };
        assert!(synth_staircase(&p).is_err());
    }

    #[test]
    fn offset_leaves_leading_gap() {
        let p = StaircaseParams { offset: 30, reset: false, node_id: 4, ..Default::default() };
        let t = synth_staircase(&p).unwrap();
        assert_eq!(t.node_id(), 4);
        assert_eq!(t.samples()[0].0, 30);
        assert_eq!(t.at_window(29), Occupancy::ZERO);
        assert_eq!(t.at_window(35).fraction(), 0.1);
        assert_eq!(t.at_window(59).fraction(), 0.5);
        assert_eq!(t.len(), 30);
    }
}
