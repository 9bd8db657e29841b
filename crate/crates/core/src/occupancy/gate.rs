use core::fmt::{self, Write};

use crate::NodeId;

/// Received power that no configuration can decode.
pub const BLOCKED_RX_DBM: f64 = -1000.0;

pub const DECISION_LOG_HEADER: &str = "time_us,node,mechanism,draw,co,outcome";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateOutcome {
    Forward,
    Blocked,
}

impl GateOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            GateOutcome::Forward => "FORWARD",
            GateOutcome::Blocked => "BLOCKED",
        }
    }
}

/// One gating decision together with the inputs that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateDecision {
    pub outcome: GateOutcome,
    pub draw: f64,
    pub co: f64,
}

impl GateDecision {
    pub fn is_blocked(&self) -> bool {
        self.outcome == GateOutcome::Blocked
    }
}

/// Interference loss: `-1000` dBm when `draw < co`, otherwise the input power
/// passes through untouched.
pub fn receiver_rx_power(tx_power_dbm: f64, co: f64, draw: f64) -> f64 {
    if draw < co {
        BLOCKED_RX_DBM
    } else {
        tx_power_dbm
    }
}

/// Sender gate: blocked when `draw < co`.
pub fn sender_gate(co: f64, draw: f64) -> GateDecision {
    let outcome = if draw < co {
        GateOutcome::Blocked
    } else {
        GateOutcome::Forward
    };
    GateDecision { outcome, draw, co }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mechanism {
    Receiver,
    Sender,
}

impl Mechanism {
    pub fn as_str(self) -> &'static str {
        match self {
            Mechanism::Receiver => "receiver",
            Mechanism::Sender => "sender",
        }
    }
}

/// A decision as it appears in the decision log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateRecord {
    pub time_us: u64,
    pub node: NodeId,
    pub mechanism: Mechanism,
    pub decision: GateDecision,
}

impl fmt::Display for GateRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{:.9},{:.6},{}",
            self.time_us,
            self.node,
            self.mechanism.as_str(),
            self.decision.draw,
            self.decision.co,
            self.decision.outcome.as_str()
        )
    }
}

pub fn write_decision_log<W: Write>(records: &[GateRecord], out: &mut W) -> fmt::Result {
    out.write_str(DECISION_LOG_HEADER)?;
    out.write_char('\n')?;
    for r in records {
        writeln!(out, "{r}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::occupancy::RandomStream;
    use alloc::string::String;
    use proptest::prelude::*;

    #[test]
    fn receiver_branches() {
        assert_eq!(receiver_rx_power(16.0, 0.5, 0.3), -1000.0);
        assert_eq!(receiver_rx_power(16.0, 0.5, 0.7), 16.0);
        assert_eq!(receiver_rx_power(16.0, 0.0, 0.0), 16.0);
    }

    #[test]
    fn sender_threshold_is_strict() {
        assert!(sender_gate(0.5, 0.49).is_blocked());
        assert_eq!(sender_gate(0.5, 0.50).outcome, GateOutcome::Forward);
        assert!(sender_gate(1.0, 0.999_999).is_blocked());
        assert!(sender_gate(1.0, 0.0).is_blocked());
        let d = sender_gate(0.25, 0.1);
        assert_eq!((d.draw, d.co), (0.1, 0.25));
    }

    #[test]
    fn blocked_fraction_tracks_occupancy() {
        const N: usize = 1_000_000;
        for &c in &[0.1, 0.37, 0.5, 0.9] {
            let mut s = RandomStream::new(11, 5);
            let blocked = (0..N).filter(|_| sender_gate(c, s.uniform()).is_blocked()).count();
            let frac = blocked as f64 / N as f64;
            assert!((frac - c).abs() <= 0.005, "sender c={c} frac={frac}");

            let mut s = RandomStream::new(12, 5);
            let lost = (0..N)
                .filter(|_| receiver_rx_power(16.0, c, s.uniform()) == BLOCKED_RX_DBM)
                .count();
            let frac = lost as f64 / N as f64;
            assert!((frac - c).abs() <= 0.005, "receiver c={c} frac={frac}");
        }
    }

    #[test]
    fn log_format() {
        let r = GateRecord {
            time_us: 1500,
            node: 1,
            mechanism: Mechanism::Sender,
            decision: sender_gate(0.4, 0.25),
        };
        let mut s = String::new();
        write_decision_log(&[r], &mut s).unwrap();
        assert_eq!(s, "time_us,node,mechanism,draw,co,outcome\n1500,1,sender,0.250000000,0.400000,BLOCKED\n");
    }

    proptest! {
        #[test]
        fn transparency(p in -100.0f64..40.0, d in 0.0f64..1.0) {
            prop_assert_eq!(receiver_rx_power(p, 0.0, d), p);
            prop_assert_eq!(receiver_rx_power(p, 1.0, d), BLOCKED_RX_DBM);
        }

        #[test]
        fn blocked_set_is_upper_interval(d in 0.0f64..1.0, co in 0.0f64..=1.0) {
            prop_assert_eq!(sender_gate(co, d).is_blocked(), co > d);
        }
    }
}
