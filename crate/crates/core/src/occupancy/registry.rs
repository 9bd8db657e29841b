use alloc::collections::BTreeMap;
use alloc::string::String;

use crate::tracekit::{BusyTrace, Occupancy};
use crate::NodeId;

/// Node id to busy trace, plus where each trace came from.
///
/// Lookups are total: a node without a trace, or a time outside its trace,
/// reads as zero occupancy. The simulator takes the registry by value, so it
/// cannot change once a run starts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OccupancyRegistry {
    traces: BTreeMap<NodeId, BusyTrace>,
    filename_index: BTreeMap<NodeId, String>,
}

impl OccupancyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `trace` to `node`, replacing any earlier binding. The trace's own
    /// node id is rewritten to `node`.
    pub fn insert(&mut self, node: NodeId, source: impl Into<String>, trace: BusyTrace) {
        self.filename_index.insert(node, source.into());
        self.traces.insert(node, trace.with_node_id(node));
    }

    pub fn with(mut self, node: NodeId, source: impl Into<String>, trace: BusyTrace) -> Self {
        self.insert(node, source, trace);
        self
    }

    pub fn trace(&self, node: NodeId) -> Option<&BusyTrace> {
        self.traces.get(&node)
    }

    pub fn source(&self, node: NodeId) -> Option<&str> {
        self.filename_index.get(&node).map(String::as_str)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.traces.keys().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn lookup(&self, node: NodeId, t_us: u64) -> Occupancy {
        self.traces
            .get(&node)
            .map_or(Occupancy::ZERO, |t| t.at_time_us(t_us))
    }
}

/// CO of the window containing `t_us` for `node`, as a fraction.
pub fn occupancy_at(registry: &OccupancyRegistry, node: NodeId, t_us: u64) -> f64 {
    registry.lookup(node, t_us).fraction()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry() -> OccupancyRegistry {
        let t = BusyTrace::from_levels(
            9,
            1000,
            [Occupancy::ZERO, Occupancy::from_fraction(0.4).unwrap()],
        )
        .unwrap();
        OccupancyRegistry::new().with(0, "a.csv", t)
    }

    #[test]
    fn step_function_lookup() {
        let r = registry();
        assert_eq!(occupancy_at(&r, 0, 1_500_000), 0.4);
        assert_eq!(occupancy_at(&r, 0, 999_999), 0.0);
        assert_eq!(occupancy_at(&r, 0, 1_000_000), 0.4);
        assert_eq!(r.trace(0).unwrap().node_id(), 0);
        assert_eq!(r.source(0), Some("a.csv"));
    }

    #[test]
    fn past_end_reads_zero() {
        assert_eq!(occupancy_at(&registry(), 0, 2_000_000), 0.0);
    }

    #[test]
    fn unknown_node_reads_zero() {
        assert_eq!(occupancy_at(&registry(), 7, 1_500_000), 0.0);
        let empty = OccupancyRegistry::new();
        assert!(empty.is_empty());
        assert_eq!(occupancy_at(&empty, 0, 0), 0.0);
    }
}
