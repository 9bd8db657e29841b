//! Emulated wireless-card survey counters.
//!
//! For every node and window the recorder accumulates the time the node was
//! transmitting and the time at least one other node was transmitting (the
//! node's sensed-busy time). Both are reported in whole milliseconds.

use alloc::vec;
use alloc::vec::Vec;

use crate::tracekit::SurveySample;
use crate::NodeId;

#[derive(Debug, Clone)]
struct Counters {
    tx_since: Option<u64>,
    others_on_air: u32,
    busy_since: Option<u64>,
    tx_us: Vec<u64>,
    busy_us: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct SurveyRecorder {
    window_us: u64,
    nodes: Vec<(NodeId, Counters)>,
}

impl SurveyRecorder {
    pub fn new(nodes: &[NodeId], window_ms: u32, duration_ms: u64) -> Self {
        let window_us = u64::from(window_ms) * 1000;
        let windows = (duration_ms * 1000).div_ceil(window_us) as usize;
        let counters = Counters {
            tx_since: None,
            others_on_air: 0,
            busy_since: None,
            tx_us: vec![0; windows],
            busy_us: vec![0; windows],
        };
        SurveyRecorder {
            window_us,
            nodes: nodes.iter().map(|&n| (n, counters.clone())).collect(),
        }
    }

    pub fn tx_start(&mut self, src: NodeId, t_us: u64) {
        for (id, c) in &mut self.nodes {
            if *id == src {
                c.tx_since = Some(t_us);
            } else {
                c.others_on_air += 1;
                if c.others_on_air == 1 {
                    c.busy_since = Some(t_us);
                }
            }
        }
    }

    pub fn tx_end(&mut self, src: NodeId, t_us: u64) {
        let window_us = self.window_us;
        for (id, c) in &mut self.nodes {
            if *id == src {
                if let Some(since) = c.tx_since.take() {
                    spread(&mut c.tx_us, window_us, since, t_us);
                }
            } else {
                c.others_on_air = c.others_on_air.saturating_sub(1);
                if c.others_on_air == 0 {
                    if let Some(since) = c.busy_since.take() {
                        spread(&mut c.busy_us, window_us, since, t_us);
                    }
                }
            }
        }
    }

    /// Closes open intervals at `end_us` and emits one sample per node per
    /// window, ordered by window then node.
    pub fn finish(mut self, end_us: u64) -> Vec<SurveySample> {
        let window_us = self.window_us;
        for (_, c) in &mut self.nodes {
            if let Some(since) = c.tx_since.take() {
                spread(&mut c.tx_us, window_us, since, end_us);
            }
            if let Some(since) = c.busy_since.take() {
                spread(&mut c.busy_us, window_us, since, end_us);
            }
        }
        let windows = self.nodes.first().map_or(0, |(_, c)| c.tx_us.len());
        let ms = |us: u64| ((us + 500) / 1000).min(window_us / 1000) as u32;
        let mut out = Vec::with_capacity(windows * self.nodes.len());
        for w in 0..windows {
            let active = (end_us.saturating_sub(w as u64 * window_us)).min(window_us);
            for (id, c) in &self.nodes {
                let active_ms = ms(active);
                out.push(SurveySample {
                    node_id: *id,
                    window_start: w as u64 * window_us / 1000,
                    active_ms,
                    busy_total_ms: ms(c.busy_us[w]).min(active_ms),
                    tx_ms: ms(c.tx_us[w]).min(active_ms),
                });
            }
        }
        out
    }
}

fn spread(acc: &mut [u64], window_us: u64, mut from: u64, to: u64) {
    while from < to {
        let w = (from / window_us) as usize;
        let boundary = (w as u64 + 1) * window_us;
        let upto = boundary.min(to);
        if let Some(slot) = acc.get_mut(w) {
            *slot += upto - from;
        }
        from = upto;
    }
}
