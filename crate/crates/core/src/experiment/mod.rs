//! Seeded experiments over the simulated medium: chip/packet error rate
//! sweeps, ACK turnaround timing and goodput under live reconfiguration.
//! Each returns plain rows plus a CSV rendering with a `#` header.

mod ack;
mod ber;
mod throughput;

pub use ack::{run_demo_ack, AckParams, AckReport, AckRow};
pub use ber::{ber_point, run_ber, BerParams, BerPoint};
pub use throughput::{
    cycle_ticks, data_mpdu, mac_payload_bits, run_demo_throughput, Switch, ThroughputParams,
    ThroughputReport, WindowRow, MAC_OVERHEAD_OCTETS,
};

use crate::controller::{RadioConfig, RegError};
use crate::medium::EmissionRecord;
use crate::phy::iqfile::config_entries;
use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error(transparent)]
    Register(#[from] RegError),
    #[error(transparent)]
    Mas(#[from] crate::mas::MasError),
    #[error(transparent)]
    Frame(#[from] crate::frame::FrameError),
}

/// Comment lines opening every CSV: tool version, command, seed and the
/// configuration in effect.
pub fn csv_header(command: &str, seed: u64, cfg: &RadioConfig, extra: &[(&str, String)]) -> String {
    let mut s = format!("# lrwpan {VERSION} {command}\n# seed={seed}\n# config:");
    for (k, v) in config_entries(&cfg.phy) {
        s.push_str(&format!(" {k}={v}"));
    }
    s.push_str(&format!(
        " turnaround_ticks={} proc_latency_ticks={} auto_ack={}",
        cfg.mas.turnaround_ticks, cfg.mas.processing_latency_ticks, cfg.mas.auto_ack
    ));
    for (k, v) in extra {
        s.push_str(&format!(" {k}={v}"));
    }
    s.push('\n');
    s
}

/// Writes emissions as a capture, in emission order.
pub fn write_pcap<W: std::io::Write>(out: W, emissions: &[EmissionRecord]) -> std::io::Result<W> {
    let mut pcap = crate::frame::pcap::PcapWriter::new(out)?;
    for e in emissions {
        pcap.write_frame(e.start_tick, &e.psdu)?;
    }
    Ok(pcap.into_inner())
}

/// Derives independent per-item seeds from one run seed.
pub(crate) fn sub_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
