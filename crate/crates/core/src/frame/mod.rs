//! IEEE 802.15.4 PHY and MAC framing.

mod crc;
mod mpdu;
pub mod pcap;
mod ppdu;

pub use crc::{append_fcs, crc16_fcs, validate_fcs};
pub use mpdu::{build_ack, data_fcf, parse_fcf, FcfFields, FrameType, MacHeader, Mpdu, MIN_MPDU_LEN};
pub use ppdu::{
    build_ppdu, decode_phr, parse_ppdu, FrameConfig, LengthMode, Ppdu, DEFAULT_PREAMBLE_LEN,
    DEFAULT_SFD, MAX_PREAMBLE_LEN, MAX_PSDU_EXTENDED, MAX_PSDU_STANDARD, MIN_PREAMBLE_LEN,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("PSDU of {len} octets exceeds the maximum of {max}")]
    LengthOverflow { len: usize, max: usize },
    #[error("SFD mismatch: expected {expected:#04x}, found {found:#04x}")]
    BadSfd { expected: u8, found: u8 },
    #[error("truncated frame: {needed} octets needed, {available} available")]
    Truncated { needed: usize, available: usize },
    #[error("frame of {len} octets is shorter than {min}")]
    TooShort { len: usize, min: usize },
    #[error("invalid frame configuration: {0}")]
    InvalidConfig(&'static str),
}
