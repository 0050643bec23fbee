use super::{
    Handle, MasConfig, MasError, OverflowPolicy, RingBuffer, RxRecord, Tick, TxEntry, TxState,
};
use crate::frame::{build_ack, parse_fcf, FrameType};
use crate::phy::{rx_frames, tx_frame, IqBuffer, PhyConfig, DEFAULT_SAMPLE_RATE_HZ, SAMPLES_PER_TICK};
use std::collections::BTreeMap;

/// A frame handed to the medium. `iq.start_tick` is the scheduled tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub handle: Handle,
    pub seq: u8,
    pub is_ack: bool,
    pub psdu: Vec<u8>,
    pub iq: IqBuffer,
}

impl Emission {
    pub fn start_tick(&self) -> Tick {
        self.iq.start_tick
    }

    pub fn end_tick(&self) -> Tick {
        self.iq.start_tick + self.iq.duration_ticks()
    }
}

/// Observable scheduler activity, in the order it happened.
#[derive(Debug, Clone, PartialEq)]
pub enum MasEvent {
    TxStart { tick: Tick, handle: Handle, seq: u8, is_ack: bool },
    TxEnd { tick: Tick, handle: Handle, seq: u8, is_ack: bool },
    Missed { tick: Tick, handle: Handle, seq: u8, is_ack: bool },
    SfdDetected { tick: Tick },
    /// A frame whose SFD was found has ended.
    RxEnd { tick: Tick, seq: Option<u8>, crc_ok: bool, report: crate::phy::PhyReport },
    /// A frame passed the FCS check and was queued.
    FrameReceived { tick: Tick, seq: Option<u8> },
    CrcError { tick: Tick },
    RxOverflow { tick: Tick },
}

impl MasEvent {
    pub fn tick(&self) -> Tick {
        match self {
            MasEvent::TxStart { tick, .. }
            | MasEvent::TxEnd { tick, .. }
            | MasEvent::Missed { tick, .. }
            | MasEvent::SfdDetected { tick }
            | MasEvent::RxEnd { tick, .. }
            | MasEvent::FrameReceived { tick, .. }
            | MasEvent::CrcError { tick }
            | MasEvent::RxOverflow { tick } => *tick,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct OnAir {
    handle: Handle,
    seq: u8,
    is_ack: bool,
    end: Tick,
}

#[derive(Debug, Clone)]
struct PendingSegment {
    deliver_at: Tick,
    iq: IqBuffer,
    phy: Option<PhyConfig>,
}

/// Per-node medium access scheduler in virtual time.
#[derive(Debug, Clone)]
pub struct Mas {
    cfg: MasConfig,
    /// PHY configurations and the tick from which each applies.
    phy_history: Vec<(Tick, PhyConfig)>,
    now: Tick,
    next_handle: u64,
    tx_ring: RingBuffer<TxEntry>,
    ack_slot: Option<TxEntry>,
    rx_ring: RingBuffer<RxRecord>,
    on_air: Option<OnAir>,
    carrier: Vec<(Tick, Tick)>,
    pending_rx: Vec<PendingSegment>,
    finished: BTreeMap<Handle, TxState>,
    events: Vec<MasEvent>,
}

const PHY_HISTORY_LEN: usize = 64;

impl Mas {
    pub fn new(cfg: MasConfig, phy: PhyConfig) -> Result<Self, MasError> {
        check_phy(&phy)?;
        Ok(Mas {
            cfg,
            phy_history: vec![(0, phy)],
            now: 0,
            next_handle: 1,
            tx_ring: RingBuffer::new(cfg.tx_capacity),
            ack_slot: None,
            rx_ring: RingBuffer::new(cfg.rx_capacity),
            on_air: None,
            carrier: Vec::new(),
            pending_rx: Vec::new(),
            finished: BTreeMap::new(),
            events: Vec::new(),
        })
    }

    pub fn now(&self) -> Tick {
        self.now
    }

    pub fn config(&self) -> &MasConfig {
        &self.cfg
    }

    pub fn phy_config(&self) -> &PhyConfig {
        &self.phy_history.last().unwrap().1
    }

    /// Replaces the scheduler configuration, resizing the rings.
    pub fn set_config(&mut self, cfg: MasConfig) -> Result<(), MasError> {
        for (ring_len, capacity) in [(self.tx_ring.len(), cfg.tx_capacity), (self.rx_ring.len(), cfg.rx_capacity)] {
            if ring_len > capacity {
                return Err(MasError::Capacity { capacity, held: ring_len });
            }
        }
        self.tx_ring.set_capacity(cfg.tx_capacity).expect("checked above");
        self.rx_ring.set_capacity(cfg.rx_capacity).expect("checked above");
        self.cfg = cfg;
        Ok(())
    }

    /// New PHY settings apply to frames starting at or after the current
    /// tick. Frames already on air or being received keep their settings.
    pub fn set_phy_config(&mut self, phy: PhyConfig) -> Result<(), MasError> {
        check_phy(&phy)?;
        match self.phy_history.last_mut() {
            Some((t, cfg)) if *t == self.now => *cfg = phy,
            _ => self.phy_history.push((self.now, phy)),
        }
        if self.phy_history.len() > PHY_HISTORY_LEN {
            self.phy_history.remove(0);
        }
        Ok(())
    }

    fn phy_at(&self, tick: Tick) -> &PhyConfig {
        self.phy_history
            .iter()
            .rev()
            .find(|(t, _)| *t <= tick)
            .map(|(_, c)| c)
            .unwrap_or(&self.phy_history[0].1)
    }

    fn alloc_handle(&mut self) -> Handle {
        let h = Handle(self.next_handle);
        self.next_handle += 1;
        h
    }

    /// Queues a PSDU in the Tx ring in state `Loaded`.
    pub fn load_packet(&mut self, psdu: &[u8], ack_request: bool, seq: u8) -> Result<Handle, MasError> {
        let frame = &self.phy_config().frame;
        let max = frame.length_mode.max_psdu();
        if psdu.len() > max {
            return Err(crate::frame::FrameError::LengthOverflow { len: psdu.len(), max }.into());
        }
        if self.tx_ring.is_full() {
            return Err(MasError::RingFull);
        }
        let handle = self.alloc_handle();
        let entry = TxEntry {
            handle,
            psdu: psdu.to_vec(),
            tx_time: None,
            state: TxState::Loaded,
            ack_request,
            seq,
        };
        self.tx_ring.push(entry).map_err(|_| MasError::RingFull)?;
        Ok(handle)
    }

    /// Schedules (or reschedules) a loaded entry. The frame's first sample
    /// is emitted at sample index `tick * 8`.
    pub fn set_transmission_time(&mut self, handle: Handle, tick: Tick) -> Result<(), MasError> {
        let now = self.now;
        if !self.tx_ring.iter().any(|e| e.handle == handle) {
            return Err(match self.tx_state(handle) {
                Some(state) => MasError::InvalidState { handle, state },
                None => MasError::UnknownHandle(handle),
            });
        }
        let entry = self.tx_ring.iter_mut().find(|e| e.handle == handle).expect("checked above");
        if !matches!(entry.state, TxState::Loaded | TxState::Scheduled) {
            return Err(MasError::InvalidState { handle, state: entry.state });
        }
        if tick <= now {
            return Err(MasError::TimeInPast { requested: tick, now });
        }
        entry.tx_time = Some(tick);
        entry.state = TxState::Scheduled;
        Ok(())
    }

    /// Pops the oldest received frame.
    pub fn get_packet(&mut self) -> Option<RxRecord> {
        self.rx_ring.pop()
    }

    pub fn rx_pending(&self) -> usize {
        self.rx_ring.len()
    }

    pub fn tx_occupancy(&self) -> usize {
        self.tx_ring.len()
    }

    pub fn tx_state(&self, handle: Handle) -> Option<TxState> {
        self.tx_ring
            .iter()
            .chain(self.ack_slot.iter())
            .find(|e| e.handle == handle)
            .map(|e| e.state)
            .or_else(|| self.finished.get(&handle).copied())
    }

    pub fn tx_entry(&self, handle: Handle) -> Option<&TxEntry> {
        self.tx_ring.iter().chain(self.ack_slot.iter()).find(|e| e.handle == handle)
    }

    /// Signal from a linked transmitter is present at this node during
    /// `[start, end)`. A node cannot start transmitting meanwhile.
    pub fn note_carrier(&mut self, start: Tick, end: Tick) {
        if end > start {
            self.carrier.push((start, end));
        }
    }

    /// Received baseband for a span of time, to be demodulated at
    /// `deliver_at`.
    pub fn deliver_segment(&mut self, iq: IqBuffer, deliver_at: Tick) {
        self.pending_rx.push(PendingSegment { deliver_at, iq, phy: None });
    }

    /// Like `deliver_segment`, but demodulated with `phy` instead of the
    /// configuration in effect when the segment starts.
    pub fn deliver_segment_with(&mut self, iq: IqBuffer, deliver_at: Tick, phy: PhyConfig) {
        self.pending_rx.push(PendingSegment { deliver_at, iq, phy: Some(phy) });
    }

    /// True while this node is transmitting or sensing a linked
    /// transmission.
    pub fn is_busy(&self, tick: Tick) -> bool {
        self.on_air.is_some_and(|a| a.end > tick) || self.carrier.iter().any(|&(s, e)| s <= tick && tick < e)
    }

    pub fn drain_events(&mut self) -> Vec<MasEvent> {
        std::mem::take(&mut self.events)
    }

    /// Earliest tick at which `advance` has work to do.
    pub fn next_event_tick(&self) -> Option<Tick> {
        let tx = self
            .tx_ring
            .iter()
            .chain(self.ack_slot.iter())
            .filter(|e| e.state == TxState::Scheduled)
            .filter_map(|e| e.tx_time);
        let rx = self.pending_rx.iter().map(|p| p.deliver_at.max(self.now));
        tx.chain(rx).chain(self.on_air.map(|a| a.end)).min()
    }

    /// Runs every due event up to and including `to`, in tick order. Within
    /// one tick: transmissions ending, transmissions starting (by handle),
    /// then received segments. Returns the frames put on air.
    pub fn advance(&mut self, to: Tick) -> Vec<Emission> {
        let mut emitted = Vec::new();
        while let Some(t) = self.next_event_tick() {
            if t > to {
                break;
            }
            self.process_tick(t, &mut emitted);
        }
        self.now = self.now.max(to);
        self.carrier.retain(|&(_, e)| e > self.now);
        emitted
    }

    fn process_tick(&mut self, t: Tick, emitted: &mut Vec<Emission>) {
        self.now = t;
        if let Some(air) = self.on_air.filter(|a| a.end <= t) {
            self.on_air = None;
            self.finish(air.handle, TxState::Done);
            self.events.push(MasEvent::TxEnd { tick: air.end, handle: air.handle, seq: air.seq, is_ack: air.is_ack });
        }

        let mut due: Vec<Handle> = self
            .tx_ring
            .iter()
            .chain(self.ack_slot.iter())
            .filter(|e| e.state == TxState::Scheduled && e.tx_time.is_some_and(|x| x <= t))
            .map(|e| e.handle)
            .collect();
        due.sort();
        for handle in due {
            self.start_tx(handle, t, emitted);
        }

        let (ready, later): (Vec<_>, Vec<_>) = std::mem::take(&mut self.pending_rx)
            .into_iter()
            .partition(|p| p.deliver_at <= t);
        self.pending_rx = later;
        for seg in ready {
            let phy = seg.phy.unwrap_or(*self.phy_at(seg.iq.start_tick));
            self.receive(seg.iq, &phy);
        }
    }

    fn entry_mut(&mut self, handle: Handle) -> Option<&mut TxEntry> {
        if self.ack_slot.as_ref().is_some_and(|e| e.handle == handle) {
            return self.ack_slot.as_mut();
        }
        self.tx_ring.iter_mut().find(|e| e.handle == handle)
    }

    fn is_ack_slot(&self, handle: Handle) -> bool {
        self.ack_slot.as_ref().is_some_and(|e| e.handle == handle)
    }

    fn start_tx(&mut self, handle: Handle, t: Tick, emitted: &mut Vec<Emission>) {
        let is_ack = self.is_ack_slot(handle);
        let busy = self.is_busy(t);
        let phy = *self.phy_config();
        let entry = self.entry_mut(handle).expect("due handle exists");
        let seq = entry.seq;
        let iq = if busy { None } else { tx_frame(&entry.psdu, &phy).ok() };
        match iq {
            Some(mut iq) => {
                iq.start_tick = t;
                entry.state = TxState::Transmitting;
                let emission = Emission { handle, seq, is_ack, psdu: entry.psdu.clone(), iq };
                self.on_air = Some(OnAir { handle, seq, is_ack, end: emission.end_tick() });
                self.events.push(MasEvent::TxStart { tick: t, handle, seq, is_ack });
                emitted.push(emission);
            }
            None => {
                self.finish(handle, TxState::Missed);
                self.events.push(MasEvent::Missed { tick: t, handle, seq, is_ack });
            }
        }
    }

    /// Moves an entry to a terminal state and releases its slot.
    fn finish(&mut self, handle: Handle, state: TxState) {
        if self.is_ack_slot(handle) {
            self.ack_slot = None;
        } else {
            self.tx_ring.remove_first(|e| e.handle == handle);
        }
        self.finished.insert(handle, state);
    }

    fn receive(&mut self, iq: IqBuffer, phy: &PhyConfig) {
        let spc = phy.samples_per_chip() as u64;
        let cps = phy.chips_per_symbol() as u64;
        let base = iq.start_sample();
        for frame in rx_frames(&iq, phy) {
            let report = frame.report;
            if !report.sfd_found {
                continue;
            }
            let start = base + report.sync_sample_offset as u64;
            let sfd_end = start + (2 * phy.frame.preamble_len as u64 + 2) * cps * spc;
            self.events.push(MasEvent::SfdDetected { tick: sfd_end.div_ceil(SAMPLES_PER_TICK) });
            let rx_end = (start + report.frame_samples as u64).div_ceil(SAMPLES_PER_TICK);
            let header = parse_fcf(&frame.psdu).ok();
            let seq = header.map(|h| h.seq);
            let crc_ok = report.crc_ok;
            self.events.push(MasEvent::RxEnd { tick: rx_end, seq, crc_ok, report: report.clone() });

            if !crc_ok {
                self.events.push(MasEvent::CrcError { tick: rx_end });
                if self.cfg.promiscuous {
                    self.enqueue(RxRecord { psdu: frame.psdu, rx_end_tick: rx_end, report });
                }
                continue;
            }
            let accepted = self.enqueue(RxRecord { psdu: frame.psdu, rx_end_tick: rx_end, report });
            if accepted {
                self.events.push(MasEvent::FrameReceived { tick: rx_end, seq });
            }
            let wants_ack = self.cfg.auto_ack
                && header.is_some_and(|h| h.fcf.ack_request && h.fcf.frame_type != FrameType::Ack);
            let refused = !accepted && self.cfg.overflow_policy == OverflowPolicy::Error;
            if wants_ack && !refused {
                self.schedule_ack(header.unwrap().seq, rx_end);
            }
        }
    }

    fn enqueue(&mut self, record: RxRecord) -> bool {
        let tick = record.rx_end_tick;
        match self.rx_ring.push(record) {
            Ok(()) => true,
            Err(_) => {
                self.events.push(MasEvent::RxOverflow { tick });
                false
            }
        }
    }

    fn schedule_ack(&mut self, seq: u8, rx_end: Tick) {
        let at = rx_end + self.cfg.turnaround_ticks + self.cfg.processing_latency_ticks;
        let handle = self.alloc_handle();
        if let Some(old) = self.ack_slot.take() {
            if old.state == TxState::Scheduled {
                self.finished.insert(old.handle, TxState::Missed);
                self.events.push(MasEvent::Missed { tick: self.now, handle: old.handle, seq: old.seq, is_ack: true });
            } else {
                self.ack_slot = Some(old);
            }
        }
        if at <= self.now || self.ack_slot.is_some() {
            self.finished.insert(handle, TxState::Missed);
            self.events.push(MasEvent::Missed { tick: self.now, handle, seq, is_ack: true });
            return;
        }
        self.ack_slot = Some(TxEntry {
            handle,
            psdu: build_ack(seq).to_bytes(),
            tx_time: Some(at),
            state: TxState::Scheduled,
            ack_request: false,
            seq,
        });
    }
}

fn check_phy(phy: &PhyConfig) -> Result<(), MasError> {
    phy.validate()?;
    if phy.sample_rate_hz != DEFAULT_SAMPLE_RATE_HZ {
        return Err(MasError::SampleRate(phy.sample_rate_hz));
    }
    Ok(())
}
