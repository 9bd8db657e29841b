use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::{BusyTrace, Occupancy, SurveySample, TraceError};
use crate::NodeId;

/// The nodes of the network being reproduced. Their transmissions are
/// explained traffic; everything else a node senses is foreign occupancy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkMembership(BTreeSet<NodeId>);

impl NetworkMembership {
    pub fn new(ids: impl IntoIterator<Item = NodeId>) -> Result<Self, TraceError> {
        let mut set = BTreeSet::new();
        for id in ids {
            if !set.insert(id) {
                return Err(TraceError::InvalidMembership("duplicate node id"));
            }
        }
        if set.is_empty() {
            return Err(TraceError::InvalidMembership("membership is empty"));
        }
        Ok(NetworkMembership(set))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.0.contains(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }
}

/// Foreign busy time sensed by `target` in one window: its busy counter minus
/// the transmit time of every other member. Negative residue (counter noise,
/// overlapping transmissions counted once) clamps to zero.
///
/// `samples` must all belong to the same window.
pub fn derive_busy_other(
    samples: &[SurveySample],
    target: NodeId,
    membership: &NetworkMembership,
) -> Result<u32, TraceError> {
    let window_start_ms = samples.first().map_or(0, |s| s.window_start);
    let find = |node: NodeId| {
        samples
            .iter()
            .find(|s| s.node_id == node)
            .ok_or(TraceError::MissingMember { window_start_ms, node })
    };
    let own = find(target)?;
    let mut members_tx: u64 = 0;
    for node in membership.iter().filter(|&n| n != target) {
        members_tx += u64::from(find(node)?.tx_ms);
    }
    Ok(u64::from(own.busy_total_ms).saturating_sub(members_tx) as u32)
}

/// Share of the window that was foreign-busy, saturating at 1.
pub fn compute_channel_occupancy(busyother_ms: u32, window_ms: u32) -> f64 {
    debug_assert!(window_ms > 0);
    (f64::from(busyother_ms) / f64::from(window_ms)).min(1.0)
}

/// Channel occupancy trace of `target` over every window of the log.
///
/// The log must cover a contiguous window range for every member; a missing
/// member sample is reported with its window index.
pub fn derive_busy_trace(
    log: &[SurveySample],
    target: NodeId,
    membership: &NetworkMembership,
    window_ms: u32,
) -> Result<BusyTrace, TraceError> {
    let mut trace = BusyTrace::new(target, window_ms)?;
    let mut by_window: BTreeMap<u64, Vec<SurveySample>> = BTreeMap::new();
    for s in log {
        by_window.entry(s.window_index(window_ms)).or_default().push(*s);
    }
    let (Some(&first), Some(&last)) = (by_window.keys().next(), by_window.keys().next_back()) else {
        return Ok(trace);
    };
    let empty = Vec::new();
    for window in first..=last {
        let samples = by_window.get(&window).unwrap_or(&empty);
        let busy_other = derive_busy_other(samples, target, membership).map_err(|e| match e {
            TraceError::MissingMember { node, .. } => TraceError::MissingSample { window, node },
            other => other,
        })?;
        let co = compute_channel_occupancy(busy_other, window_ms);
        trace.push(window, Occupancy::saturating_from_fraction(co))?;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn s(node: NodeId, window: u64, busy: u32, tx: u32) -> SurveySample {
        SurveySample {
            node_id: node,
            window_start: window * 1000,
            active_ms: 1000,
            busy_total_ms: busy,
            tx_ms: tx,
        }
    }

    fn members(ids: &[NodeId]) -> NetworkMembership {
        NetworkMembership::new(ids.iter().copied()).unwrap()
    }

    #[test]
    fn busy_other_substitution() {
        let m = members(&[0, 1, 2]);
        let w = [s(0, 0, 600, 10), s(1, 0, 0, 150), s(2, 0, 0, 50)];
        assert_eq!(derive_busy_other(&w, 0, &m).unwrap(), 400);
    }

    #[test]
    fn busy_other_clamps_at_zero() {
        let m = members(&[0, 1, 2]);
        let w = [s(0, 0, 150, 0), s(1, 0, 0, 120), s(2, 0, 0, 80)];
        assert_eq!(derive_busy_other(&w, 0, &m).unwrap(), 0);
    }

    #[test]
    fn own_network_explains_all_busy_time() {
        let m = members(&[0, 1]);
        let w = [s(0, 0, 500, 0), s(1, 0, 0, 500)];
        assert_eq!(derive_busy_other(&w, 0, &m).unwrap(), 0);
    }

    #[test]
    fn foreign_node_tx_is_not_subtracted() {
        let m = members(&[0, 1]);
        let w = [s(0, 0, 700, 0), s(1, 0, 0, 200), s(9, 0, 0, 500)];
        assert_eq!(derive_busy_other(&w, 0, &m).unwrap(), 500);
    }

    #[test]
    fn missing_member_is_an_error() {
        let m = members(&[0, 1]);
        assert_eq!(
            derive_busy_other(&[s(0, 2, 500, 0)], 0, &m),
            Err(TraceError::MissingMember { window_start_ms: 2000, node: 1 })
        );
    }

    #[test]
    fn occupancy_fraction() {
        assert_eq!(compute_channel_occupancy(400, 1000), 0.4);
        assert_eq!(compute_channel_occupancy(0, 1000), 0.0);
        assert_eq!(compute_channel_occupancy(1200, 1000), 1.0);
    }

    #[test]
    fn two_node_log_to_trace() {
        // busy_other(B) per window: 300-300=0, 700-300=400, 1000-0=1000
        let log = vec![
            s(0, 0, 0, 300),
            s(1, 0, 300, 20),
            s(0, 1, 0, 300),
            s(1, 1, 700, 20),
            s(0, 2, 0, 0),
            s(1, 2, 1000, 0),
        ];
        let t = derive_busy_trace(&log, 1, &members(&[0, 1]), 1000).unwrap();
        assert_eq!(t.dense_fractions(), [0.0, 0.4, 1.0]);
        assert_eq!(t.node_id(), 1);
    }

    #[test]
    fn single_member_idle_log() {
        let log: Vec<_> = (0..4).map(|w| s(5, w, 0, 0)).collect();
        let t = derive_busy_trace(&log, 5, &members(&[5]), 1000).unwrap();
        assert_eq!(t.dense_fractions(), [0.0; 4]);
    }

    #[test]
    fn missing_window_named_in_error() {
        let mut log = Vec::new();
        for w in 0..8 {
            log.push(s(0, w, 100, 0));
            if w != 5 {
                log.push(s(1, w, 0, 0));
            }
        }
        assert_eq!(
            derive_busy_trace(&log, 0, &members(&[0, 1]), 1000),
            Err(TraceError::MissingSample { window: 5, node: 1 })
        );
    }

    #[test]
    fn membership_validation() {
        assert!(NetworkMembership::new([]).is_err());
        assert!(NetworkMembership::new([1, 1]).is_err());
        assert!(members(&[2, 1]).contains(2));
    }

    proptest! {
        #[test]
        fn busy_other_is_linear_until_clamp(
            busy in 0u32..=1000, txs in proptest::collection::vec(0u32..=400, 1..4), delta in 0u32..=1000,
        ) {
            let n = txs.len() as NodeId;
            let m = NetworkMembership::new(0..=n).unwrap();
            let mut w = vec![s(0, 0, busy, 0)];
            w.extend(txs.iter().enumerate().map(|(i, &tx)| s(i as NodeId + 1, 0, 0, tx)));
            let base = derive_busy_other(&w, 0, &m).unwrap();
            w[0].busy_total_ms = busy + delta;
            let bumped = derive_busy_other(&w, 0, &m).unwrap();
            let others: u32 = txs.iter().sum();
            if busy >= others {
                prop_assert_eq!(bumped, base + delta);
            } else {
                prop_assert_eq!(bumped, (busy + delta).saturating_sub(others));
            }
        }

        #[test]
        fn occupancy_always_in_unit_interval(busy in any::<u32>(), window in 1u32..) {
            let co = compute_channel_occupancy(busy, window);
            prop_assert!((0.0..=1.0).contains(&co));
        }

        #[test]
        fn explained_busy_time_gives_zero_trace(txs in proptest::collection::vec(proptest::collection::vec(0u32..300, 3), 1..10)) {
            let m = members(&[0, 1, 2]);
            let mut log = Vec::new();
            for (w, tx) in txs.iter().enumerate() {
                let total: u32 = tx.iter().sum();
                for node in 0..3u32 {
                    let busy = total - tx[node as usize];
                    log.push(s(node, w as u64, busy, tx[node as usize]));
                }
            }
            for node in 0..3 {
                let t = derive_busy_trace(&log, node, &m, 1000).unwrap();
                prop_assert!(t.samples().iter().all(|&(_, co)| co == Occupancy::ZERO));
                prop_assert_eq!(t.len(), txs.len());
            }
        }
    }
}
