//! Fixed 32-bit register layout and the translation between register
//! values and PHY/MAS configuration.

use crate::frame::{FrameConfig, LengthMode};
use crate::mas::MasConfig;
use crate::phy::{PhyConfig, PulseShape, Spreading};

pub const CHIP_ID: u32 = 0x15C0_0154;

/// Q16.16 fixed-point scale.
const Q16: f64 = 65536.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Access {
    ReadOnly,
    ReadWrite,
    /// Reads observe, writing 1 clears the bit.
    WriteOneToClear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Register {
    ChipId,
    Spreading,
    PulseShape,
    PulseParam,
    PreambleLen,
    Sfd,
    LengthMode,
    Amplitude,
    DetectThreshold,
    PreambleValue,
    Turnaround,
    AutoAck,
    ProcLatency,
    IrqEnable,
    IrqStatus,
    Rssi,
    Lqi,
    SyncOffset,
    Phase,
    CrcOk,
    RxCount,
    CrcErrCount,
    RxOverflowCount,
}

/// Bits of IRQ_ENABLE and IRQ_STATUS.
pub const IRQ_MASK: u32 = 0x3F;

impl Register {
    pub const ALL: [Register; 23] = [
        Register::ChipId,
        Register::Spreading,
        Register::PulseShape,
        Register::PulseParam,
        Register::PreambleLen,
        Register::Sfd,
        Register::LengthMode,
        Register::Amplitude,
        Register::DetectThreshold,
        Register::PreambleValue,
        Register::Turnaround,
        Register::AutoAck,
        Register::ProcLatency,
        Register::IrqEnable,
        Register::IrqStatus,
        Register::Rssi,
        Register::Lqi,
        Register::SyncOffset,
        Register::Phase,
        Register::CrcOk,
        Register::RxCount,
        Register::CrcErrCount,
        Register::RxOverflowCount,
    ];

    /// Registers holding configuration, in the order `apply` writes them.
    pub const CONFIG: [Register; 13] = [
        Register::Spreading,
        Register::PulseShape,
        Register::PulseParam,
        Register::PreambleLen,
        Register::Sfd,
        Register::LengthMode,
        Register::Amplitude,
        Register::DetectThreshold,
        Register::PreambleValue,
        Register::Turnaround,
        Register::AutoAck,
        Register::ProcLatency,
        Register::IrqEnable,
    ];

    pub fn addr(self) -> u16 {
        match self {
            Register::ChipId => 0x0000,
            Register::Spreading => 0x0004,
            Register::PulseShape => 0x0008,
            Register::PulseParam => 0x000C,
            Register::PreambleLen => 0x0010,
            Register::Sfd => 0x0014,
            Register::LengthMode => 0x0018,
            Register::Amplitude => 0x001C,
            Register::DetectThreshold => 0x0020,
            Register::PreambleValue => 0x0024,
            Register::Turnaround => 0x0040,
            Register::AutoAck => 0x0044,
            Register::ProcLatency => 0x0048,
            Register::IrqEnable => 0x0080,
            Register::IrqStatus => 0x0084,
            Register::Rssi => 0x0100,
            Register::Lqi => 0x0104,
            Register::SyncOffset => 0x0108,
            Register::Phase => 0x010C,
            Register::CrcOk => 0x0110,
            Register::RxCount => 0x0114,
            Register::CrcErrCount => 0x0118,
            Register::RxOverflowCount => 0x011C,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Register::ChipId => "CHIP_ID",
            Register::Spreading => "SPREADING",
            Register::PulseShape => "PULSE_SHAPE",
            Register::PulseParam => "PULSE_PARAM",
            Register::PreambleLen => "PREAMBLE_LEN",
            Register::Sfd => "SFD",
            Register::LengthMode => "LENGTH_MODE",
            Register::Amplitude => "AMPLITUDE",
            Register::DetectThreshold => "DETECT_THRESHOLD",
            Register::PreambleValue => "PREAMBLE_VALUE",
            Register::Turnaround => "TURNAROUND_TICKS",
            Register::AutoAck => "AUTO_ACK",
            Register::ProcLatency => "PROC_LATENCY",
            Register::IrqEnable => "IRQ_ENABLE",
            Register::IrqStatus => "IRQ_STATUS",
            Register::Rssi => "RSSI",
            Register::Lqi => "LQI",
            Register::SyncOffset => "SYNC_OFFSET",
            Register::Phase => "PHASE",
            Register::CrcOk => "CRC_OK",
            Register::RxCount => "RX_COUNT",
            Register::CrcErrCount => "CRC_ERR_COUNT",
            Register::RxOverflowCount => "RX_OVERFLOW_COUNT",
        }
    }

    pub fn access(self) -> Access {
        match self {
            Register::IrqStatus => Access::WriteOneToClear,
            r if Register::CONFIG.contains(&r) => Access::ReadWrite,
            _ => Access::ReadOnly,
        }
    }

    /// Bits kept on write.
    pub fn mask(self) -> u32 {
        match self {
            Register::Sfd | Register::PreambleValue => 0xFF,
            Register::AutoAck => 0x1,
            Register::IrqEnable | Register::IrqStatus => IRQ_MASK,
            _ => u32::MAX,
        }
    }

    pub fn from_addr(addr: u16) -> Option<Register> {
        Register::ALL.iter().copied().find(|r| r.addr() == addr)
    }

    /// Looks up a register by name (case-insensitive) or by address in
    /// decimal or `0x` hex.
    pub fn lookup(key: &str) -> Option<Register> {
        let key = key.trim();
        if let Some(r) = Register::ALL.iter().copied().find(|r| r.name().eq_ignore_ascii_case(key)) {
            return Some(r);
        }
        crate::kv::parse_uint(key).and_then(|a| u16::try_from(a).ok()).and_then(Register::from_addr)
    }

    pub(crate) fn index(self) -> usize {
        Register::ALL.iter().position(|&r| r == self).unwrap()
    }
}

pub fn to_q16(x: f64) -> u32 {
    (x * Q16).round().clamp(i32::MIN as f64, i32::MAX as f64) as i32 as u32
}

pub fn from_q16(v: u32) -> f64 {
    v as i32 as f64 / Q16
}

/// Rounds to the nearest value representable in Q16.16.
pub fn quantize_q16(x: f64) -> f64 {
    from_q16(to_q16(x))
}

/// PHY and MAS settings mirrored by the register map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioConfig {
    pub phy: PhyConfig,
    pub mas: MasConfig,
    pub irq_enable: u32,
}

impl Default for RadioConfig {
    fn default() -> Self {
        let mut cfg = RadioConfig { phy: PhyConfig::default(), mas: MasConfig::default(), irq_enable: 0 };
        cfg.phy.amplitude = quantize_q16(cfg.phy.amplitude);
        cfg.phy.detect_threshold = quantize_q16(cfg.phy.detect_threshold);
        cfg
    }
}

/// Why a set of register values does not form a legal configuration.
pub type Illegal = String;

/// Configuration register values, indexed by `Register::index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Image(pub(crate) [u32; Register::ALL.len()]);

impl Image {
    pub fn get(&self, r: Register) -> u32 {
        self.0[r.index()]
    }

    pub fn set(&mut self, r: Register, v: u32) {
        self.0[r.index()] = v & r.mask();
    }

    /// Encodes a configuration. The pulse parameter keeps `prev`'s value
    /// unless the pulse is raised-cosine.
    pub fn encode(cfg: &RadioConfig, prev: &Image) -> Image {
        let mut img = *prev;
        let phy = &cfg.phy;
        img.set(Register::Spreading, phy.chips_per_symbol() as u32);
        let (shape, param) = match phy.pulse {
            PulseShape::HalfSine => (0, None),
            PulseShape::Rect => (1, None),
            PulseShape::RaisedCosine(r) => (2, Some(to_q16(r))),
        };
        img.set(Register::PulseShape, shape);
        if let Some(p) = param {
            img.set(Register::PulseParam, p);
        }
        img.set(Register::PreambleLen, phy.frame.preamble_len as u32);
        img.set(Register::Sfd, phy.frame.sfd as u32);
        img.set(
            Register::LengthMode,
            match phy.frame.length_mode {
                LengthMode::Standard7Bit => 0,
                LengthMode::Extended16Bit => 1,
            },
        );
        img.set(Register::Amplitude, to_q16(phy.amplitude));
        img.set(Register::DetectThreshold, to_q16(phy.detect_threshold));
        img.set(Register::PreambleValue, phy.frame.preamble_value as u32);
        img.set(Register::Turnaround, u32::try_from(cfg.mas.turnaround_ticks).unwrap_or(u32::MAX));
        img.set(Register::AutoAck, cfg.mas.auto_ack as u32);
        img.set(
            Register::ProcLatency,
            u32::try_from(cfg.mas.processing_latency_ticks).unwrap_or(u32::MAX),
        );
        img.set(Register::IrqEnable, cfg.irq_enable);
        img
    }

    /// Decodes the configuration registers on top of `base`, which
    /// supplies the fields the map does not expose.
    pub fn decode(&self, base: &RadioConfig) -> Result<RadioConfig, Illegal> {
        let mut cfg = *base;
        let phy = &mut cfg.phy;
        let sf = self.get(Register::Spreading);
        phy.spreading = Spreading::from_chips(sf as usize).map_err(|e| e.to_string())?;
        let rolloff = from_q16(self.get(Register::PulseParam));
        phy.pulse = match self.get(Register::PulseShape) {
            0 => PulseShape::HalfSine,
            1 => PulseShape::Rect,
            2 => PulseShape::RaisedCosine(rolloff),
            other => return Err(format!("pulse shape {other} is not 0, 1 or 2")),
        };
        phy.frame = FrameConfig {
            preamble_len: self.get(Register::PreambleLen) as usize,
            preamble_value: self.get(Register::PreambleValue) as u8,
            sfd: self.get(Register::Sfd) as u8,
            length_mode: match self.get(Register::LengthMode) {
                0 => LengthMode::Standard7Bit,
                1 => LengthMode::Extended16Bit,
                other => return Err(format!("length mode {other} is not 0 or 1")),
            },
        };
        phy.amplitude = from_q16(self.get(Register::Amplitude));
        phy.detect_threshold = from_q16(self.get(Register::DetectThreshold));
        phy.validate().map_err(|e| e.to_string())?;
        cfg.mas.turnaround_ticks = self.get(Register::Turnaround) as u64;
        cfg.mas.auto_ack = self.get(Register::AutoAck) != 0;
        cfg.mas.processing_latency_ticks = self.get(Register::ProcLatency) as u64;
        cfg.irq_enable = self.get(Register::IrqEnable);
        Ok(cfg)
    }
}
