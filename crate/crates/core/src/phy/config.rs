use crate::frame::{FrameConfig, LengthMode};
use thiserror::Error;

pub const DEFAULT_SAMPLE_RATE_HZ: u32 = 8_000_000;
pub const DEFAULT_CHIP_RATE_HZ: u32 = 2_000_000;
pub const DEFAULT_DETECT_THRESHOLD: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhyConfigError {
    #[error("sample rate {sample_rate_hz} Hz is not an even multiple (>= 2) of chip rate {chip_rate_hz} Hz")]
    Rates { sample_rate_hz: u32, chip_rate_hz: u32 },
    #[error("spreading factor {0} is not one of 8, 16, 32, 64")]
    Spreading(usize),
    #[error("raised-cosine rolloff {0} is outside (0, 1]")]
    Rolloff(f64),
    #[error("amplitude {0} must be positive and finite")]
    Amplitude(f64),
    #[error("detection threshold {0} is outside (0, 1]")]
    Threshold(f64),
    #[error(transparent)]
    Frame(#[from] crate::frame::FrameError),
}

/// Chips per 4-bit data symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Spreading {
    /// The 2450 MHz 16-ary table, 32 chips per symbol.
    #[default]
    Standard32,
    /// Truncated (8, 16) or repeated (64) standard rows. Not compliant.
    Custom(usize),
}

impl Spreading {
    pub fn chips_per_symbol(self) -> usize {
        match self {
            Spreading::Standard32 => 32,
            Spreading::Custom(n) => n,
        }
    }

    pub fn from_chips(n: usize) -> Result<Self, PhyConfigError> {
        match n {
            32 => Ok(Spreading::Standard32),
            8 | 16 | 64 => Ok(Spreading::Custom(n)),
            other => Err(PhyConfigError::Spreading(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PulseShape {
    #[default]
    HalfSine,
    Rect,
    /// Rolloff in (0, 1].
    RaisedCosine(f64),
}

impl PulseShape {
    pub fn name(&self) -> &'static str {
        match self {
            PulseShape::HalfSine => "halfsine",
            PulseShape::Rect => "rect",
            PulseShape::RaisedCosine(_) => "rc",
        }
    }
}

/// Every runtime-tunable PHY parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhyConfig {
    pub sample_rate_hz: u32,
    pub chip_rate_hz: u32,
    pub spreading: Spreading,
    pub pulse: PulseShape,
    pub frame: FrameConfig,
    /// Peak rail amplitude of the transmitted waveform.
    pub amplitude: f64,
    /// Preamble correlation threshold as a fraction of the ideal peak.
    pub detect_threshold: f64,
}

impl Default for PhyConfig {
    fn default() -> Self {
        PhyConfig {
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            chip_rate_hz: DEFAULT_CHIP_RATE_HZ,
            spreading: Spreading::Standard32,
            pulse: PulseShape::HalfSine,
            frame: FrameConfig::default(),
            amplitude: 1.0,
            detect_threshold: DEFAULT_DETECT_THRESHOLD,
        }
    }
}

impl PhyConfig {
    pub fn validate(&self) -> Result<(), PhyConfigError> {
        let rates = PhyConfigError::Rates {
            sample_rate_hz: self.sample_rate_hz,
            chip_rate_hz: self.chip_rate_hz,
        };
        if self.chip_rate_hz == 0 || !self.sample_rate_hz.is_multiple_of(self.chip_rate_hz) {
            return Err(rates);
        }
        let spc = self.sample_rate_hz / self.chip_rate_hz;
        if spc < 2 || !spc.is_multiple_of(2) {
            return Err(rates);
        }
        let n = self.spreading.chips_per_symbol();
        if Spreading::from_chips(n)? != self.spreading {
            return Err(PhyConfigError::Spreading(n));
        }
        if let PulseShape::RaisedCosine(r) = self.pulse {
            if !(r > 0.0 && r <= 1.0) {
                return Err(PhyConfigError::Rolloff(r));
            }
        }
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(PhyConfigError::Amplitude(self.amplitude));
        }
        if !(self.detect_threshold > 0.0 && self.detect_threshold <= 1.0) {
            return Err(PhyConfigError::Threshold(self.detect_threshold));
        }
        self.frame.validate()?;
        Ok(())
    }

    pub fn samples_per_chip(&self) -> usize {
        (self.sample_rate_hz / self.chip_rate_hz) as usize
    }

    pub fn chips_per_symbol(&self) -> usize {
        self.spreading.chips_per_symbol()
    }

    /// Chips needed for a PPDU of `octets` octets.
    pub fn chips_for_octets(&self, octets: usize) -> usize {
        2 * octets * self.chips_per_symbol()
    }

    /// Sample count of a modulated burst of `chips` chips. The final Q-rail
    /// pulse ends one chip period after the last I-rail pulse.
    pub fn samples_for_chips(&self, chips: usize) -> usize {
        (chips + 1) * self.samples_per_chip()
    }

    /// Sample count of the waveform `tx_frame` produces for a PSDU.
    pub fn frame_samples(&self, psdu_len: usize) -> usize {
        self.samples_for_chips(self.chips_for_octets(self.frame.ppdu_len(psdu_len)))
    }

    /// Nominal on-air duration of a PPDU in microseconds (chip count over
    /// chip rate).
    pub fn airtime_us(&self, ppdu_octets: usize) -> f64 {
        self.chips_for_octets(ppdu_octets) as f64 * 1e6 / self.chip_rate_hz as f64
    }

    pub fn is_standard_compliant(&self) -> bool {
        self.sample_rate_hz == DEFAULT_SAMPLE_RATE_HZ
            && self.chip_rate_hz == DEFAULT_CHIP_RATE_HZ
            && self.spreading == Spreading::Standard32
            && self.pulse == PulseShape::HalfSine
            && self.frame == FrameConfig::default()
    }

    /// Short human label, e.g. `sf32-halfsine`.
    pub fn label(&self) -> String {
        let mut s = format!("sf{}-{}", self.chips_per_symbol(), self.pulse.name());
        if let PulseShape::RaisedCosine(r) = self.pulse {
            s.push_str(&format!("{r}"));
        }
        if self.frame.length_mode == LengthMode::Extended16Bit {
            s.push_str("-ext");
        }
        s
    }
}
