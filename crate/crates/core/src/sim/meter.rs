use alloc::vec::Vec;

/// One application-level delivery at the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub time_us: u64,
    pub flow: u32,
    pub payload_bytes: u32,
}

/// Received throughput of one flow per metering interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputSeries {
    pub flow: u32,
    pub interval_ms: u32,
    /// Mbit/s for intervals `0..len`, contiguous.
    pub mbps: Vec<f64>,
}

impl ThroughputSeries {
    pub fn mean(&self) -> Option<f64> {
        if self.mbps.is_empty() {
            None
        } else {
            Some(self.mbps.iter().sum::<f64>() / self.mbps.len() as f64)
        }
    }
}

/// Bins one flow's deliveries by timestamp into `interval_ms` buckets
/// covering `[0, duration_ms)`. Deliveries at or after the end are ignored.
pub fn meter(deliveries: &[Delivery], flow: u32, interval_ms: u32, duration_ms: u64) -> ThroughputSeries {
    let interval_us = u64::from(interval_ms) * 1000;
    let n = (duration_ms * 1000).div_ceil(interval_us) as usize;
    let mut bytes = alloc::vec![0u64; n];
    for d in deliveries.iter().filter(|d| d.flow == flow) {
        if let Some(slot) = bytes.get_mut((d.time_us / interval_us) as usize) {
            *slot += u64::from(d.payload_bytes);
        }
    }
    ThroughputSeries {
        flow,
        interval_ms,
        mbps: bytes.into_iter().map(|b| (b * 8) as f64 / interval_us as f64).collect(),
    }
}
