//! Register-mapped control of one radio node: PHY/MAS configuration,
//! last-reception report and maskable event interrupts.

mod registers;

pub use registers::{
    from_q16, quantize_q16, to_q16, Access, Image, RadioConfig, Register, CHIP_ID, IRQ_MASK,
};

use crate::kv::{self, KvSection};
use crate::mas::{Emission, Handle, Mas, MasError, MasEvent, RxRecord, Tick, TxState};
use crate::phy::{IqBuffer, PhyReport};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegError {
    #[error("no register at {0:#06x}")]
    UnknownRegister(u16),
    #[error("register {0} is read-only")]
    ReadOnlyRegister(&'static str),
    #[error("illegal value {value:#x} for {register}: {reason}")]
    IllegalValue { register: &'static str, value: u32, reason: String },
    #[error("unknown register name {0:?}")]
    UnknownName(String),
    #[error("register dump line {line}: {message}")]
    Dump { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IrqKind {
    SfdDetected,
    FrameReceived,
    CrcError,
    TxDone,
    RxOverflow,
    ScheduledTxMissed,
}

impl IrqKind {
    pub const ALL: [IrqKind; 6] = [
        IrqKind::SfdDetected,
        IrqKind::FrameReceived,
        IrqKind::CrcError,
        IrqKind::TxDone,
        IrqKind::RxOverflow,
        IrqKind::ScheduledTxMissed,
    ];

    pub fn bit(self) -> u32 {
        1 << self as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IrqEvent {
    pub kind: IrqKind,
    pub tick: Tick,
    /// Transmit handle for Tx events, running reception count for Rx events.
    pub detail: u64,
}

/// Counters and last-report values behind the read-only block.
#[derive(Debug, Clone, Default, PartialEq)]
struct Status {
    last_report: Option<PhyReport>,
    rx_count: u32,
    crc_err_count: u32,
    rx_overflow_count: u32,
    irq_status: u32,
}

/// One radio node behind its register map.
#[derive(Debug, Clone)]
pub struct RadioController {
    mas: Mas,
    cfg: RadioConfig,
    image: Image,
    status: Status,
    irqs: Vec<IrqEvent>,
    log: Vec<MasEvent>,
}

impl RadioController {
    pub fn new(cfg: RadioConfig) -> Result<Self, RegError> {
        let mut rc = RadioController {
            mas: Mas::new(Default::default(), Default::default()).expect("default config is valid"),
            cfg: RadioConfig::default(),
            image: Image::encode(&RadioConfig::default(), &Image([0; Register::ALL.len()])),
            status: Status::default(),
            irqs: Vec::new(),
            log: Vec::new(),
        };
        rc.image.set(Register::PulseParam, to_q16(0.5));
        rc.apply_config(&cfg)?;
        Ok(rc)
    }

    pub fn config(&self) -> &RadioConfig {
        &self.cfg
    }

    pub fn mas(&self) -> &Mas {
        &self.mas
    }

    pub fn mas_mut(&mut self) -> &mut Mas {
        &mut self.mas
    }

    pub fn read_register(&self, addr: u16) -> Result<u32, RegError> {
        let reg = Register::from_addr(addr).ok_or(RegError::UnknownRegister(addr))?;
        Ok(self.read(reg))
    }

    pub fn read(&self, reg: Register) -> u32 {
        let report = self.status.last_report.as_ref();
        match reg {
            Register::ChipId => CHIP_ID,
            Register::IrqStatus => self.status.irq_status,
            Register::Rssi => report.map_or(0, |r| {
                if r.rssi_db.is_finite() {
                    to_q16(r.rssi_db)
                } else {
                    i32::MIN as u32
                }
            }),
            Register::Lqi => report.map_or(0, |r| r.lqi as u32),
            Register::SyncOffset => report.map_or(0, |r| r.sync_sample_offset as u32),
            Register::Phase => report.map_or(0, |r| to_q16(r.phase_estimate_rad)),
            Register::CrcOk => report.map_or(0, |r| r.crc_ok as u32),
            Register::RxCount => self.status.rx_count,
            Register::CrcErrCount => self.status.crc_err_count,
            Register::RxOverflowCount => self.status.rx_overflow_count,
            r => self.image.get(r),
        }
    }

    pub fn write_register(&mut self, addr: u16, value: u32) -> Result<(), RegError> {
        let reg = Register::from_addr(addr).ok_or(RegError::UnknownRegister(addr))?;
        self.write(reg, value)
    }

    /// Writes one register. Configuration changes apply from the next
    /// frame boundary.
    pub fn write(&mut self, reg: Register, value: u32) -> Result<(), RegError> {
        match reg.access() {
            Access::ReadOnly => Err(RegError::ReadOnlyRegister(reg.name())),
            Access::WriteOneToClear => {
                self.status.irq_status &= !(value & reg.mask());
                Ok(())
            }
            Access::ReadWrite => {
                let mut img = self.image;
                img.set(reg, value);
                let cfg = img.decode(&self.cfg).map_err(|reason| RegError::IllegalValue {
                    register: reg.name(),
                    value,
                    reason,
                })?;
                self.commit(img, cfg)
            }
        }
    }

    /// Applies a whole configuration, or nothing if any field is illegal.
    /// Fractional fields are rounded to Q16.16.
    pub fn apply_config(&mut self, cfg: &RadioConfig) -> Result<(), RegError> {
        let img = Image::encode(cfg, &self.image);
        let decoded = img.decode(cfg).map_err(|reason| RegError::IllegalValue {
            register: "config",
            value: 0,
            reason,
        })?;
        self.commit(img, decoded)
    }

    fn commit(&mut self, img: Image, cfg: RadioConfig) -> Result<(), RegError> {
        let illegal = |e: MasError| RegError::IllegalValue { register: "config", value: 0, reason: e.to_string() };
        let mut mas = self.mas.clone();
        mas.set_phy_config(cfg.phy).map_err(illegal)?;
        mas.set_config(cfg.mas).map_err(illegal)?;
        self.mas = mas;
        self.image = img;
        self.cfg = cfg;
        Ok(())
    }

    /// Every register as `NAME=0x........` lines.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for r in Register::ALL {
            out.push_str(&format!("{}={:#010x}\n", r.name(), self.read(r)));
        }
        out
    }

    /// Restores the writable registers from `dump` output or any subset of
    /// `name=value` / `0xADDR=value` lines. Read-only entries are ignored.
    /// All-or-nothing.
    pub fn restore(&mut self, text: &str) -> Result<(), RegError> {
        let doc = kv::parse(text).map_err(|e| RegError::Dump { line: e.line, message: e.message })?;
        self.restore_section(&doc[0])
    }

    pub fn restore_section(&mut self, section: &KvSection) -> Result<(), RegError> {
        let mut img = self.image;
        for e in &section.entries {
            let reg = Register::lookup(&e.key).ok_or_else(|| RegError::UnknownName(e.key.clone()))?;
            let value = kv::parse_uint(&e.value)
                .and_then(|v| u32::try_from(v).ok())
                .ok_or_else(|| RegError::Dump { line: e.line, message: format!("bad value {:?}", e.value) })?;
            if reg.access() == Access::ReadWrite {
                img.set(reg, value);
            }
        }
        let cfg = img.decode(&self.cfg).map_err(|reason| RegError::IllegalValue {
            register: "dump",
            value: 0,
            reason,
        })?;
        self.commit(img, cfg)
    }

    pub fn load_packet(&mut self, psdu: &[u8], ack_request: bool, seq: u8) -> Result<Handle, MasError> {
        self.mas.load_packet(psdu, ack_request, seq)
    }

    pub fn set_transmission_time(&mut self, handle: Handle, tick: Tick) -> Result<(), MasError> {
        self.mas.set_transmission_time(handle, tick)
    }

    pub fn get_packet(&mut self) -> Option<RxRecord> {
        self.mas.get_packet()
    }

    pub fn tx_state(&self, handle: Handle) -> Option<TxState> {
        self.mas.tx_state(handle)
    }

    pub fn note_carrier(&mut self, start: Tick, end: Tick) {
        self.mas.note_carrier(start, end);
    }

    pub fn deliver_segment(&mut self, iq: IqBuffer, deliver_at: Tick) {
        self.mas.deliver_segment(iq, deliver_at);
    }

    pub fn deliver_segment_with(&mut self, iq: IqBuffer, deliver_at: Tick, phy: crate::phy::PhyConfig) {
        self.mas.deliver_segment_with(iq, deliver_at, phy);
    }

    pub fn next_event_tick(&self) -> Option<Tick> {
        self.mas.next_event_tick()
    }

    pub fn now(&self) -> Tick {
        self.mas.now()
    }

    /// Advances the scheduler, raising interrupts for what happened.
    pub fn advance(&mut self, to: Tick) -> Vec<Emission> {
        let out = self.mas.advance(to);
        for ev in self.mas.drain_events() {
            self.observe(&ev);
            self.log.push(ev);
        }
        out
    }

    fn observe(&mut self, ev: &MasEvent) {
        let rx = self.status.rx_count as u64;
        let (kind, tick, detail) = match *ev {
            MasEvent::SfdDetected { tick } => (IrqKind::SfdDetected, tick, rx),
            MasEvent::RxEnd { ref report, .. } => {
                self.status.last_report = Some(report.clone());
                self.status.rx_count = self.status.rx_count.wrapping_add(1);
                return;
            }
            MasEvent::FrameReceived { tick, .. } => (IrqKind::FrameReceived, tick, rx),
            MasEvent::CrcError { tick } => {
                self.status.crc_err_count = self.status.crc_err_count.wrapping_add(1);
                (IrqKind::CrcError, tick, rx)
            }
            MasEvent::RxOverflow { tick } => {
                self.status.rx_overflow_count = self.status.rx_overflow_count.wrapping_add(1);
                (IrqKind::RxOverflow, tick, rx)
            }
            MasEvent::TxEnd { tick, handle, .. } => (IrqKind::TxDone, tick, handle.0),
            MasEvent::Missed { tick, handle, .. } => (IrqKind::ScheduledTxMissed, tick, handle.0),
            MasEvent::TxStart { .. } => return,
        };
        self.raise(IrqEvent { kind, tick, detail });
    }

    fn raise(&mut self, ev: IrqEvent) {
        if self.cfg.irq_enable & ev.kind.bit() != 0 {
            self.status.irq_status |= ev.kind.bit();
            self.irqs.push(ev);
        }
    }

    /// Drains delivered interrupts in raise order. IRQ_STATUS is untouched.
    pub fn poll_irqs(&mut self) -> Vec<IrqEvent> {
        std::mem::take(&mut self.irqs)
    }

    /// Drains the scheduler events observed since the last call.
    pub fn drain_log(&mut self) -> Vec<MasEvent> {
        std::mem::take(&mut self.log)
    }

    pub fn last_report(&self) -> Option<&PhyReport> {
        self.status.last_report.as_ref()
    }
}

#[cfg(test)]
mod tests;
