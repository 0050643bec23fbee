use super::*;
use crate::frame::{data_fcf, Mpdu};
use crate::mas::MasConfig;
use crate::phy::{PhyConfig, PulseShape, Spreading};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rc() -> RadioController {
    RadioController::new(RadioConfig::default()).unwrap()
}

fn data(seq: u8, ack: bool) -> Vec<u8> {
    Mpdu::new(data_fcf(ack), seq, &[1, 2, 3, 4, 5, 6]).to_bytes()
}

/// Runs both nodes to `until`, passing every emission to the other node
/// over an ideal wire.
fn run_pair(a: &mut RadioController, b: &mut RadioController, until: Tick) {
    loop {
        let next = [a.next_event_tick(), b.next_event_tick()].into_iter().flatten().min();
        let t = match next {
            Some(t) if t <= until => t,
            _ => break,
        };
        for a_sends in [true, false] {
            let (s, d) = if a_sends { (&mut *a, &mut *b) } else { (&mut *b, &mut *a) };
            for e in s.advance(t) {
                d.note_carrier(e.start_tick(), e.end_tick());
                d.deliver_segment(e.iq.clone(), e.end_tick());
            }
        }
    }
    a.advance(until);
    b.advance(until);
}

fn send(a: &mut RadioController, psdu: &[u8], ack: bool, at: Tick) -> Handle {
    let h = a.load_packet(psdu, ack, psdu.get(2).copied().unwrap_or(0)).unwrap();
    a.set_transmission_time(h, at).unwrap();
    h
}

#[test]
fn chip_id_is_constant_and_read_only() {
    let mut r = rc();
    assert_eq!(r.read_register(0x0000).unwrap(), 0x15C0_0154);
    assert_eq!(r.write_register(0x0000, 1), Err(RegError::ReadOnlyRegister("CHIP_ID")));
    assert_eq!(r.write_register(0x0110, 1), Err(RegError::ReadOnlyRegister("CRC_OK")));
    assert_eq!(r.read_register(0x0002), Err(RegError::UnknownRegister(0x0002)));
    assert_eq!(r.write_register(0x0200, 1), Err(RegError::UnknownRegister(0x0200)));
}

#[test]
fn spreading_write_applies_to_next_frame() {
    let mut r = rc();
    r.write_register(0x0004, 16).unwrap();
    assert_eq!(r.read_register(0x0004).unwrap(), 16);
    assert_eq!(r.config().phy.spreading, Spreading::Custom(16));
    send(&mut r, &data(1, false), false, 10);
    let tx = r.advance(100);
    let sf16 = PhyConfig { spreading: Spreading::Custom(16), ..Default::default() };
    assert_eq!(tx[0].iq.len(), sf16.frame_samples(11));
    assert!(matches!(r.write_register(0x0004, 12), Err(RegError::IllegalValue { .. })));
    assert_eq!(r.read_register(0x0004).unwrap(), 16);
}

#[test]
fn in_flight_frame_keeps_its_config() {
    let mut a = rc();
    let mut b = rc();
    send(&mut a, &data(1, false), false, 10);
    let tx = a.advance(10);
    // Reconfigure both ends while the frame is on air.
    a.write(Register::Spreading, 8).unwrap();
    b.note_carrier(tx[0].start_tick(), tx[0].end_tick());
    b.deliver_segment(tx[0].iq.clone(), tx[0].end_tick());
    b.advance(11);
    b.write(Register::Spreading, 8).unwrap();
    b.advance(20_000);
    assert_eq!(tx[0].iq.len(), PhyConfig::default().frame_samples(11));
    assert_eq!(b.get_packet().unwrap().psdu, data(1, false));
}

#[test]
fn masked_widths_on_write() {
    let mut r = rc();
    r.write(Register::Sfd, 0x1A7).unwrap();
    assert_eq!(r.read(Register::Sfd), 0xA7);
    r.write(Register::IrqEnable, 0xFFFF_FFFF).unwrap();
    assert_eq!(r.read(Register::IrqEnable), 0x3F);
    r.write(Register::AutoAck, 2).unwrap();
    assert_eq!(r.read(Register::AutoAck), 0);
    assert!(!r.config().mas.auto_ack);
}

#[test]
fn report_block_mirrors_last_reception() {
    let mut a = rc();
    let mut b = rc();
    send(&mut a, &data(9, false), false, 100);
    run_pair(&mut a, &mut b, 20_000);
    assert_eq!(b.read_register(0x0110).unwrap(), 1);
    assert_eq!(b.read(Register::RxCount), 1);
    assert_eq!(b.read(Register::Lqi), 255);
    assert_eq!(b.read(Register::SyncOffset), b.last_report().unwrap().sync_sample_offset as u32);
    let rssi = from_q16(b.read(Register::Rssi));
    assert!(rssi < 0.0 && rssi > -0.05, "{rssi}");
    assert!(from_q16(b.read(Register::Phase)).abs() < 1e-3);
}

#[test]
fn irq_status_is_write_one_to_clear() {
    let mut a = rc();
    let mut b = rc();
    b.write(Register::IrqEnable, IrqKind::FrameReceived.bit()).unwrap();
    send(&mut a, &data(1, false), false, 100);
    run_pair(&mut a, &mut b, 20_000);
    assert_eq!(b.read_register(0x0084).unwrap(), 0x2);
    // Polling does not clear the status bits.
    assert_eq!(b.poll_irqs().len(), 1);
    assert_eq!(b.read_register(0x0084).unwrap(), 0x2);
    b.write_register(0x0084, 0x1).unwrap();
    assert_eq!(b.read_register(0x0084).unwrap(), 0x2);
    b.write_register(0x0084, 0x2).unwrap();
    assert_eq!(b.read_register(0x0084).unwrap(), 0);
}

#[test]
fn disabled_irq_is_not_delivered() {
    let mut a = rc();
    let mut b = rc();
    b.write(Register::IrqEnable, 0).unwrap();
    send(&mut a, &data(1, false), false, 100);
    run_pair(&mut a, &mut b, 20_000);
    assert!(b.poll_irqs().is_empty());
    assert_eq!(b.read(Register::IrqStatus) & 0x2, 0);
    assert_eq!(b.read(Register::RxCount), 1);
}

#[test]
fn crc_error_irq_carries_rx_tick() {
    let mut a = rc();
    let mut b = rc();
    b.write(Register::IrqEnable, IrqKind::CrcError.bit()).unwrap();
    let mut psdu = data(1, true);
    psdu[4] ^= 0x10;
    send(&mut a, &psdu, true, 100);
    run_pair(&mut a, &mut b, 20_000);
    let irqs = b.poll_irqs();
    assert_eq!(irqs.len(), 1);
    assert_eq!(irqs[0].kind, IrqKind::CrcError);
    let end = 100 + (PhyConfig::default().frame_samples(psdu.len()) as u64).div_ceil(8);
    assert_eq!(irqs[0].tick, end);
    assert_eq!(b.read(Register::CrcOk), 0);
    assert_eq!(b.read(Register::CrcErrCount), 1);
}

#[test]
fn frame_irqs_in_ascending_tick_order() {
    let mut a = rc();
    let mut b = rc();
    b.write(Register::IrqEnable, IrqKind::FrameReceived.bit()).unwrap();
    send(&mut a, &data(1, false), false, 100);
    send(&mut a, &data(2, false), false, 3000);
    run_pair(&mut a, &mut b, 20_000);
    let irqs = b.poll_irqs();
    assert_eq!(irqs.len(), 2);
    assert!(irqs[0].tick < irqs[1].tick);
    assert!(irqs.iter().all(|e| e.kind == IrqKind::FrameReceived));
}

#[test]
fn default_config_is_standard_compliant() {
    let mut r = rc();
    r.apply_config(&RadioConfig::default()).unwrap();
    assert!(r.config().phy.is_standard_compliant());
}

#[test]
fn apply_config_is_atomic() {
    let mut r = rc();
    r.write(Register::Spreading, 64).unwrap();
    let before = r.dump();
    let mut bad = RadioConfig::default();
    bad.phy.spreading = Spreading::Custom(8);
    bad.phy.pulse = PulseShape::RaisedCosine(1.5);
    assert!(matches!(r.apply_config(&bad), Err(RegError::IllegalValue { .. })));
    assert_eq!(r.dump(), before);
    let mut slow = RadioConfig::default();
    slow.phy.sample_rate_hz = 4_000_000;
    assert!(r.apply_config(&slow).is_err());
    assert_eq!(r.dump(), before);
}

fn random_config(rng: &mut ChaCha8Rng) -> RadioConfig {
    let mut c = RadioConfig::default();
    c.phy.spreading = Spreading::from_chips([8, 16, 32, 64][rng.gen_range(0..4)]).unwrap();
    c.phy.pulse = match rng.gen_range(0..3) {
        0 => PulseShape::HalfSine,
        1 => PulseShape::Rect,
        _ => PulseShape::RaisedCosine(rng.gen_range(0.01..=1.0)),
    };
    c.phy.frame.preamble_len = rng.gen_range(2..=16);
    c.phy.frame.sfd = rng.gen();
    if rng.gen_bool(0.5) {
        c.phy.frame.length_mode = crate::frame::LengthMode::Extended16Bit;
        c.phy.frame.preamble_value = rng.gen();
    }
    c.phy.amplitude = rng.gen_range(0.01..100.0);
    c.phy.detect_threshold = rng.gen_range(0.01..=1.0);
    c.mas = MasConfig {
        turnaround_ticks: rng.gen_range(0..100_000),
        processing_latency_ticks: rng.gen_range(0..100),
        auto_ack: rng.gen(),
        ..MasConfig::default()
    };
    c.irq_enable = rng.gen_range(0..64);
    c
}

#[test]
fn apply_config_round_trips_through_registers() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut r = rc();
    for _ in 0..500 {
        let c = random_config(&mut rng);
        r.apply_config(&c).unwrap();
        let mut img = r.image;
        for reg in Register::CONFIG {
            img.set(reg, r.read(reg));
        }
        let back = img.decode(&RadioConfig::default()).unwrap();
        let mut want = c;
        want.phy.amplitude = quantize_q16(c.phy.amplitude);
        want.phy.detect_threshold = quantize_q16(c.phy.detect_threshold);
        if let PulseShape::RaisedCosine(x) = c.phy.pulse {
            want.phy.pulse = PulseShape::RaisedCosine(quantize_q16(x));
        }
        assert_eq!(back, want);
        assert_eq!(*r.config(), want);
    }
}

#[test]
fn random_register_writes_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut r = rc();
    let writable: Vec<Register> = Register::ALL.into_iter().filter(|r| r.access() == Access::ReadWrite).collect();
    for _ in 0..1000 {
        let reg = writable[rng.gen_range(0..writable.len())];
        let extended = r.read(Register::LengthMode) == 1;
        let value: u32 = match reg {
            Register::Spreading => [8, 16, 32, 64][rng.gen_range(0..4)],
            Register::PulseShape => rng.gen_range(0..3),
            Register::PulseParam | Register::DetectThreshold => rng.gen_range(1..=0x1_0000),
            Register::PreambleLen => rng.gen_range(2..=16),
            Register::LengthMode if r.read(Register::PreambleValue) != 0 => 1,
            Register::LengthMode => rng.gen_range(0..2),
            Register::PreambleValue if !extended => 0,
            Register::Amplitude => rng.gen_range(1..=0x7FFF_FFFF),
            _ => rng.gen(),
        };
        r.write(reg, value).unwrap_or_else(|e| panic!("{reg:?}={value:#x}: {e}"));
        assert_eq!(r.read(reg), value & reg.mask(), "{reg:?}");
    }
}

#[test]
fn dump_restore_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut a = rc();
    a.apply_config(&random_config(&mut rng)).unwrap();
    let text = a.dump();
    let mut b = rc();
    b.restore(&text).unwrap();
    assert_eq!(b.config(), a.config());
    for reg in Register::CONFIG {
        assert_eq!(b.read(reg), a.read(reg));
    }
    let before = b.dump();
    assert!(b.restore("SPREADING=12\n").is_err());
    assert!(b.restore("NOPE=1\n").is_err());
    assert_eq!(b.dump(), before);
    b.restore("0x0004=16\nsfd=0x7a\n").unwrap();
    assert_eq!(b.read(Register::Spreading), 16);
    assert_eq!(b.read(Register::Sfd), 0x7A);
}

#[test]
fn every_event_raises_one_irq_when_enabled() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for enabled in [0u32, IRQ_MASK] {
        let cfg = RadioConfig { irq_enable: enabled, mas: MasConfig { rx_capacity: 3, ..Default::default() }, ..Default::default() };
        let mut a = RadioController::new(cfg).unwrap();
        let mut b = RadioController::new(cfg).unwrap();
        let mut t = 100;
        for i in 0..60u8 {
            let mut psdu = data(i, rng.gen_bool(0.7));
            if rng.gen_bool(0.2) {
                psdu[3] ^= 0x40;
            }
            let ack = psdu[0] & 0x20 != 0;
            let node = if rng.gen_bool(0.5) { &mut a } else { &mut b };
            send(node, &psdu, ack, t);
            // Occasionally overlap so that transmissions get missed.
            t += if rng.gen_bool(0.2) { 500 } else { 3000 };
            if rng.gen_bool(0.3) {
                while b.get_packet().is_some() {}
                while a.get_packet().is_some() {}
            }
            run_pair(&mut a, &mut b, t - 1);
        }
        run_pair(&mut a, &mut b, t + 20_000);
        for node in [&mut a, &mut b] {
            let log = node.drain_log();
            let irqs = node.poll_irqs();
            let expected = log
                .iter()
                .filter(|e| !matches!(e, MasEvent::TxStart { .. } | MasEvent::RxEnd { .. }))
                .count();
            assert!(expected > 60);
            assert_eq!(irqs.len(), if enabled == 0 { 0 } else { expected });
            for kind in IrqKind::ALL {
                let n = irqs.iter().filter(|e| e.kind == kind).count();
                if enabled != 0 && kind != IrqKind::RxOverflow {
                    assert!(n > 0 || kind == IrqKind::ScheduledTxMissed, "{kind:?}");
                }
            }
        }
    }
}
