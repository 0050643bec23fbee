//! 2.4 GHz O-QPSK DSSS baseband: spreading, pulse shaping, preamble
//! synchronisation and despreading.

mod chips;
mod config;
pub mod iqfile;
mod pulse;
mod rx;
mod tx;

pub use chips::{standard_row_bits, ChipSequenceTable};
pub use config::{
    PhyConfig, PhyConfigError, PulseShape, Spreading, DEFAULT_CHIP_RATE_HZ,
    DEFAULT_DETECT_THRESHOLD, DEFAULT_SAMPLE_RATE_HZ,
};
pub use pulse::Pulse;
pub use rx::{
    despread_hard, detect_preamble, preamble_reference, rx_frames, soft_chips, PhyReport,
    RxFrame, SyncCandidate,
};
pub use tx::{chip_sequence, modulate, octets_to_symbols, spread, symbols_to_octets, tx_frame};

use num_complex::Complex64;

/// Samples per microsecond tick at the default 8 Msps.
pub const SAMPLES_PER_TICK: u64 = 8;

/// Complex baseband samples anchored at a microsecond tick.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IqBuffer {
    pub samples: Vec<Complex64>,
    /// Tick of sample 0.
    pub start_tick: u64,
}

impl IqBuffer {
    pub fn new(samples: Vec<Complex64>, start_tick: u64) -> Self {
        IqBuffer { samples, start_tick }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Absolute sample index of sample 0.
    pub fn start_sample(&self) -> u64 {
        self.start_tick * SAMPLES_PER_TICK
    }

    /// Ticks covered, rounding a partial final tick up.
    pub fn duration_ticks(&self) -> u64 {
        (self.samples.len() as u64).div_ceil(SAMPLES_PER_TICK)
    }
}
