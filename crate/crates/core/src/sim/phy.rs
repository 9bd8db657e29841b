//! 802.11a OFDM timing and the SNR-threshold error model.

use super::SimError;
use crate::NodeId;

/// The eight 802.11a OFDM rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rate {
    R6,
    R9,
    R12,
    R18,
    R24,
    R36,
    R48,
    R54,
}

impl Rate {
    pub const ALL: [Rate; 8] = [
        Rate::R6,
        Rate::R9,
        Rate::R12,
        Rate::R18,
        Rate::R24,
        Rate::R36,
        Rate::R48,
        Rate::R54,
    ];

    pub fn from_mbps(mbps: u32) -> Result<Self, SimError> {
        Rate::ALL
            .into_iter()
            .find(|r| r.mbps() == mbps)
            .ok_or(SimError::UnsupportedRate(mbps))
    }

    pub fn mbps(self) -> u32 {
        match self {
            Rate::R6 => 6,
            Rate::R9 => 9,
            Rate::R12 => 12,
            Rate::R18 => 18,
            Rate::R24 => 24,
            Rate::R36 => 36,
            Rate::R48 => 48,
            Rate::R54 => 54,
        }
    }

    /// Data bits carried by one 4 µs OFDM symbol.
    pub fn bits_per_symbol(self) -> u32 {
        self.mbps() * 4
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// 802.11a PHY and DCF constants, all in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dot11aParams {
    pub slot_us: u64,
    pub sifs_us: u64,
    pub difs_us: u64,
    pub cw_min: u32,
    pub cw_max: u32,
    /// Retransmissions allowed after the first attempt.
    pub retry_limit: u32,
    pub preamble_us: u64,
    pub symbol_us: u64,
    pub service_bits: u32,
    pub tail_bits: u32,
    /// MAC header, LLC/SNAP and FCS bytes around a data payload.
    pub mac_overhead_bytes: u32,
    /// IPv4 and UDP header bytes in front of the application payload.
    pub ip_udp_overhead_bytes: u32,
    pub ack_bytes: u32,
}

impl Default for Dot11aParams {
    fn default() -> Self {
        Dot11aParams {
            slot_us: 9,
            sifs_us: 16,
            difs_us: 34,
            cw_min: 15,
            cw_max: 1023,
            retry_limit: 7,
            preamble_us: 20,
            symbol_us: 4,
            service_bits: 16,
            tail_bits: 6,
            mac_overhead_bytes: 36,
            ip_udp_overhead_bytes: 28,
            ack_bytes: 14,
        }
    }
}

impl Dot11aParams {
    /// On-air duration of an MPDU of `mpdu_bytes` at `rate`.
    pub fn mpdu_airtime_us(&self, mpdu_bytes: u32, rate: Rate) -> u64 {
        let bits = u64::from(self.service_bits + self.tail_bits) + 8 * u64::from(mpdu_bytes);
        let symbols = bits.div_ceil(u64::from(rate.bits_per_symbol()));
        self.preamble_us + symbols * self.symbol_us
    }

    /// MPDU size of a data frame carrying `payload_bytes` of UDP payload.
    pub fn data_mpdu_bytes(&self, payload_bytes: u32) -> u32 {
        payload_bytes + self.ip_udp_overhead_bytes + self.mac_overhead_bytes
    }

    pub fn ack_timeout_us(&self, control_rate: Rate) -> u64 {
        self.sifs_us + self.slot_us + self.mpdu_airtime_us(self.ack_bytes, control_rate)
    }
}

/// A MAC frame in flight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub src: NodeId,
    pub dst: NodeId,
    /// UDP payload bytes; zero for ACKs.
    pub payload_bytes: u32,
    pub tx_power_dbm: f64,
    pub rate: Rate,
    pub is_ack: bool,
    pub flow: u32,
    pub seq: u64,
}

/// Airtime of a frame. Data frames must fit the IP MTU.
pub fn airtime(frame: &Frame, params: &Dot11aParams, mtu_bytes: u32) -> Result<u64, SimError> {
    if frame.is_ack {
        return Ok(params.mpdu_airtime_us(params.ack_bytes, frame.rate));
    }
    let ip_bytes = frame.payload_bytes + params.ip_udp_overhead_bytes;
    if ip_bytes > mtu_bytes {
        return Err(SimError::PayloadTooLarge {
            payload: frame.payload_bytes,
            mtu: mtu_bytes,
        });
    }
    Ok(params.mpdu_airtime_us(params.data_mpdu_bytes(frame.payload_bytes), frame.rate))
}

/// Minimum SNR (dB) needed to decode each rate, indexed like [`Rate::ALL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrThresholds(pub [f64; 8]);

impl Default for SnrThresholds {
    fn default() -> Self {
        SnrThresholds([6.0, 7.0, 9.0, 11.0, 15.0, 18.0, 23.0, 25.0])
    }
}

impl SnrThresholds {
    pub fn min_snr_db(&self, rate: Rate) -> f64 {
        self.0[rate.index()]
    }
}

/// Frame decodes when its SNR reaches the rate's threshold.
pub fn decode(rx_power_dbm: f64, rate: Rate, noise_floor_dbm: f64, thresholds: &SnrThresholds) -> bool {
    rx_power_dbm - noise_floor_dbm >= thresholds.min_snr_db(rate)
}
