//! Medium access scheduler: Tx and Rx ring buffers driven by a virtual
//! microsecond timer, time-triggered transmission and automatic
//! acknowledgment.

mod ring;
mod scheduler;

pub use ring::RingBuffer;
pub use scheduler::{Emission, Mas, MasEvent};

use crate::frame::FrameError;
use crate::phy::PhyReport;
use std::fmt;
use thiserror::Error;

/// Microseconds since simulation start. One tick spans 8 samples at 8 Msps.
pub type Tick = u64;

/// Default IEEE 802.15.4 Rx-to-Tx turnaround (aTurnaroundTime, 12 symbols).
pub const DEFAULT_TURNAROUND_TICKS: Tick = 192;
pub const DEFAULT_RING_CAPACITY: usize = 16;

/// Identifies a transmit entry for the scheduler's lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Handle(pub u64);

impl fmt::Display for Handle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TxState {
    Loaded,
    Scheduled,
    Transmitting,
    Done,
    Missed,
}

impl TxState {
    pub fn is_terminal(self) -> bool {
        matches!(self, TxState::Done | TxState::Missed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TxEntry {
    pub handle: Handle,
    pub psdu: Vec<u8>,
    pub tx_time: Option<Tick>,
    pub state: TxState,
    pub ack_request: bool,
    pub seq: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RxRecord {
    pub psdu: Vec<u8>,
    /// End of the tick holding the frame's final sample.
    pub rx_end_tick: Tick,
    pub report: PhyReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OverflowPolicy {
    /// A frame arriving at a full Rx ring is discarded after being
    /// acknowledged.
    #[default]
    DropNewest,
    /// A frame arriving at a full Rx ring is discarded and not acknowledged.
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MasConfig {
    pub turnaround_ticks: Tick,
    /// Added to the turnaround before an automatic ACK goes out.
    pub processing_latency_ticks: Tick,
    pub auto_ack: bool,
    /// Keep frames that failed the FCS check in the Rx ring.
    pub promiscuous: bool,
    pub tx_capacity: usize,
    pub rx_capacity: usize,
    pub overflow_policy: OverflowPolicy,
}

impl Default for MasConfig {
    fn default() -> Self {
        MasConfig {
            turnaround_ticks: DEFAULT_TURNAROUND_TICKS,
            processing_latency_ticks: 0,
            auto_ack: true,
            promiscuous: false,
            tx_capacity: DEFAULT_RING_CAPACITY,
            rx_capacity: DEFAULT_RING_CAPACITY,
            overflow_policy: OverflowPolicy::DropNewest,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MasError {
    #[error("transmit ring is full")]
    RingFull,
    #[error(transparent)]
    LengthOverflow(#[from] FrameError),
    #[error("unknown handle {0}")]
    UnknownHandle(Handle),
    #[error("tick {requested} is not after the current tick {now}")]
    TimeInPast { requested: Tick, now: Tick },
    #[error("handle {handle} is {state:?} and can no longer be scheduled")]
    InvalidState { handle: Handle, state: TxState },
    #[error("the scheduler runs at 8 Msps, got {0} Hz")]
    SampleRate(u32),
    #[error("ring capacity {capacity} cannot hold {held} queued entries")]
    Capacity { capacity: usize, held: usize },
    #[error(transparent)]
    Phy(#[from] crate::phy::PhyConfigError),
}
