//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use lrwpan_core::controller::{Access, IrqKind, Register};
use lrwpan_core::experiment::ber_point;
use lrwpan_core::frame::{append_fcs, crc16_fcs, data_fcf, validate_fcs, Mpdu};
use lrwpan_core::mas::MasEvent;
use lrwpan_core::phy::{rx_frames, standard_row_bits, tx_frame, ChipSequenceTable};
use lrwpan_core::{
    LinkModel, Mas, MasConfig, Network, PhyConfig, PulseShape, RadioConfig, RadioController, Spreading,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// PSDU for loopback: a single random octet, or random octets closed by a
/// valid FCS.
fn random_psdu(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    let body: Vec<u8> = (0..len.saturating_sub(2)).map(|_| rng.gen()).collect();
    if len < 2 {
        vec![rng.gen()]
    } else {
        append_fcs(&body)
    }
}

fn loopback(cfg: &PhyConfig, frames: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..frames {
        let len = rng.gen_range(1..=127);
        let psdu = random_psdu(&mut rng, len);
        let iq = tx_frame(&psdu, cfg).map_err(|e| e.to_string())?;
        let got = rx_frames(&iq, cfg);
        let ok = got.len() == 1 && got[0].psdu == psdu && got[0].report.crc_ok;
        check(ok, || format!("frame {i} (len {len}) failed for {}", cfg.label()))?;
    }
    Ok(frames)
}

fn c1_standard_loopback() -> Outcome {
    let t = Instant::now();
    let n = loopback(&PhyConfig::default(), 1000, 1)?;
    let el = t.elapsed();
    check(el < Duration::from_secs(60), || format!("took {el:?}"))?;
    Ok(format!("{n}/{n} frames byte-exact with CRC OK in {:.1} s", el.as_secs_f64()))
}

fn c2_config_matrix() -> Outcome {
    let mut total = 0;
    for sf in [8, 16, 32, 64] {
        for pulse in [PulseShape::HalfSine, PulseShape::Rect, PulseShape::RaisedCosine(0.5)] {
            let cfg = PhyConfig { spreading: Spreading::from_chips(sf).unwrap(), pulse, ..Default::default() };
            total += loopback(&cfg, 100, sf as u64)?;
        }
    }
    Ok(format!("12 configurations, {total}/{total} frames"))
}

/// Bit-serial CRC-16/CCITT as a shift register fed LSB first.
fn crc_oracle(data: &[u8]) -> u16 {
    let mut reg: u16 = 0;
    for &b in data {
        for i in 0..8 {
            let fb = ((reg >> 15) & 1) as u8 ^ ((b >> i) & 1);
            reg <<= 1;
            if fb == 1 {
                reg ^= 0x1021;
            }
        }
    }
    reg.reverse_bits()
}

fn c3_crc_vectors() -> Outcome {
    let check_val = crc16_fcs(b"123456789");
    check(check_val == 0x2189, || format!("check value {check_val:#06x}"))?;
    check(crc_oracle(b"123456789") == 0x2189, || "oracle disagrees".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut flips = 0;
    for _ in 0..100 {
        let len = rng.gen_range(0..100);
        let body: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        check(crc16_fcs(&body) == crc_oracle(&body), || "CRC differs from oracle".into())?;
        let mpdu = Mpdu::new(data_fcf(rng.gen()), rng.gen(), &body).to_bytes();
        check(validate_fcs(&mpdu), || "fresh MPDU invalid".into())?;
        for bit in 0..mpdu.len() * 8 {
            let mut m = mpdu.clone();
            m[bit / 8] ^= 1 << (bit % 8);
            check(!validate_fcs(&m), || format!("flip of bit {bit} accepted"))?;
            flips += 1;
        }
    }
    Ok(format!("check value 0x2189, {flips} single-bit corruptions all rejected"))
}

/// Chips c0..c31 of the 2450 MHz O-QPSK symbol-to-chip table.
const STANDARD_TABLE: [&str; 16] = [
    "11011001110000110101001000101110",
    "11101101100111000011010100100010",
    "00101110110110011100001101010010",
    "00100010111011011001110000110101",
    "01010010001011101101100111000011",
    "00110101001000101110110110011100",
    "11000011010100100010111011011001",
    "10011100001101010010001011101101",
    "10001100100101100000011101111011",
    "10111000110010010110000001110111",
    "01111011100011001001011000000111",
    "01110111101110001100100101100000",
    "00000111011110111000110010010110",
    "01100000011101111011100011001001",
    "10010110000001110111101110001100",
    "11001001011000000111011110111000",
];

fn c4_chip_table() -> Outcome {
    let table = ChipSequenceTable::new(Spreading::Standard32);
    let rows: Vec<Vec<i8>> = table.rows().map(|r| r.to_vec()).collect();
    for (s, text) in STANDARD_TABLE.iter().enumerate() {
        let want: Vec<i8> = text.chars().map(|c| if c == '1' { 1 } else { -1 }).collect();
        check(rows[s] == want, || format!("row {s} differs from the standard table"))?;
        check(standard_row_bits(s as u8) == u32::from_str_radix(text, 2).unwrap(), || format!("row {s} bits"))?;
    }
    for k in 1..8 {
        for (j, &c) in rows[0].iter().enumerate() {
            check(rows[k][(j + 4 * k) % 32] == c, || format!("row {k} is not a 4k-chip rotation"))?;
        }
    }
    for k in 8..16 {
        for (j, (&c, &base)) in rows[k].iter().zip(&rows[k - 8]).enumerate() {
            let want = if j % 2 == 1 { -base } else { base };
            check(c == want, || format!("row {k} is not row {} with odd chips negated", k - 8))?;
        }
    }
    Ok("16 rows match the table, rotation and odd-chip negation identities hold".into())
}

fn lrwpan(dir: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_lrwpan"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn csv_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn c5_ack_deadline() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (args, want) in [(vec!["demo-ack"], 192u64), (vec!["demo-ack", "--proc-latency", "7"], 199)] {
        let rows = csv_rows(&lrwpan(dir.path(), &args)?);
        check(rows.len() == 100, || format!("{} rows", rows.len()))?;
        let mut max_err = 0u64;
        for r in &rows {
            let t: u64 = r[4].parse().map_err(|_| format!("frame {} not acknowledged", r[0]))?;
            max_err = max_err.max(t.abs_diff(want));
        }
        check(max_err == 0, || format!("max error {max_err} ticks against {want}"))?;
        parts.push(format!("{want} ticks x100"));
    }
    Ok(format!("turnaround {}, max error 0", parts.join(", ")))
}

fn c6_scheduling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mas = Mas::new(MasConfig::default(), PhyConfig::default()).map_err(|e| e.to_string())?;
    let mut calls = 0;
    let mut worst = 0u64;
    let mut free_at = 1u64;
    while calls < 10_000 {
        let len = rng.gen_range(1..=127);
        let psdu = vec![0u8; len];
        let dur = (PhyConfig::default().frame_samples(len) as u64).div_ceil(8);
        let h = mas.load_packet(&psdu, false, 0).map_err(|e| e.to_string())?;
        // A few provisional times before the final one.
        let mut at = 0;
        for _ in 0..rng.gen_range(1..=3) {
            at = free_at + rng.gen_range(1..5_000);
            mas.set_transmission_time(h, at).map_err(|e| e.to_string())?;
            calls += 1;
        }
        let em = mas.advance(at);
        check(em.len() == 1, || format!("expected one emission at {at}, got {}", em.len()))?;
        worst = worst.max(em[0].start_tick().abs_diff(at)).max(em[0].iq.start_sample().abs_diff(8 * at));
        free_at = at + dur;
        mas.advance(free_at);
    }
    check(worst == 0, || format!("deviation {worst}"))?;
    Ok(format!("{calls} set_transmission_time calls, max start deviation 0 ticks"))
}

fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn c7_chip_error_rate() -> Outcome {
    let t = Instant::now();
    let snr_db = 4.32;
    let p = ber_point(snr_db, 120, 127, &PhyConfig::default(), 7).map_err(|e| e.to_string())?;
    let theory = q_function((2.0 * 10f64.powf(snr_db / 10.0)).sqrt());
    let rel = p.cer() / theory - 1.0;
    check(p.chips >= 1_000_000, || format!("only {} chips", p.chips))?;
    check(rel.abs() <= 0.10, || format!("CER {:.4e} vs {:.4e} ({:+.1}%)", p.cer(), theory, 100.0 * rel))?;
    let el = t.elapsed();
    check(el < Duration::from_secs(300), || format!("took {el:?}"))?;
    Ok(format!(
        "CER {:.4e} over {} chips vs Q(sqrt(2 SNR)) {:.4e} ({:+.2}%), {:.1} s",
        p.cer(),
        p.chips,
        theory,
        100.0 * rel,
        el.as_secs_f64()
    ))
}

fn c8_constant_envelope() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0f64;
    for i in 0..1000 {
        let amplitude = if i % 2 == 0 { 1.0 } else { rng.gen_range(0.1..4.0) };
        let sf = [8, 16, 32, 64][rng.gen_range(0..4)];
        let cfg = PhyConfig { amplitude, spreading: Spreading::from_chips(sf).unwrap(), ..Default::default() };
        let len = rng.gen_range(1..=127);
        let iq = tx_frame(&random_psdu(&mut rng, len), &cfg).map_err(|e| e.to_string())?;
        let spc = cfg.samples_per_chip();
        // Both rails are active from one chip in until the last I pulse ends.
        for s in &iq.samples[spc..iq.len() - spc] {
            worst = worst.max((s.norm() - amplitude).abs());
        }
    }
    check(worst <= 1e-9, || format!("envelope deviation {worst:e}"))?;
    Ok(format!("1000 frames, max |s| deviation {worst:.1e}"))
}

/// Ticks from one data start to the next: data airtime, turnaround, ACK
/// airtime, inter-frame gap. A burst of c chips lasts (c + 1) half-chip
/// samples at 8 Msps; ticks round up.
fn oracle_cycle(chips_per_symbol: u64) -> u64 {
    let airtime = |octets: u64| (((2 * octets * chips_per_symbol + 1) * 4) as f64 / 8.0).ceil() as u64;
    airtime(4 + 1 + 1 + 127) + 192 + airtime(4 + 1 + 1 + 5) + 192
}

fn c9_throughput() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = lrwpan(dir.path(), &["demo-throughput", "--switch-at", "3000000:SPREADING=16", "--csv", "tp.csv"])?;
    check(out.contains("crc_errors=0"), || format!("CRC errors: {out}"))?;
    let csv = std::fs::read_to_string(dir.path().join("tp.csv")).map_err(|e| e.to_string())?;
    let rows = csv_rows(&csv);
    check(rows.len() == 6, || format!("{} windows", rows.len()))?;
    // MAC payload: 127 octets minus 9 header and 2 FCS octets.
    let bits = 8.0 * (127 - 11) as f64;
    let g32 = bits * 1e6 / oracle_cycle(32) as f64;
    let g16 = bits * 1e6 / oracle_cycle(16) as f64;
    let g: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    let mut worst = 0f64;
    for (i, want) in [(0, g32), (1, g32), (2, g32), (4, g16), (5, g16)] {
        let rel = g[i] / want - 1.0;
        worst = worst.max(rel.abs());
        check(rel.abs() < 0.01, || format!("window {i}: {:.0} bps vs oracle {want:.0} ({:+.2}%)", g[i], 100.0 * rel))?;
    }
    check(g[3] > g[2] && g[3] <= g[4] * 1.01, || format!("switch window {:.0} not between", g[3]))?;
    Ok(format!(
        "SF32 {:.0} bps (oracle {g32:.0}), SF16 {:.0} bps (oracle {g16:.0}), max error {:.2}%",
        g[0],
        g[5],
        100.0 * worst
    ))
}

fn c10_determinism() -> Outcome {
    let runs: Vec<Vec<Vec<u8>>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let d = dir.path();
            let cmds: [&[&str]; 5] = [
                &["encode", "--psdu", "0102030405060708", "--pulse", "rc", "-o", "a.iq"],
                &["ber", "--snr", "2,5", "--frames", "6", "--seed", "77", "--csv", "ber.csv"],
                &["demo-ack", "--frames", "20", "--seed", "77", "--csv", "ack.csv", "--pcap", "ack.pcap"],
                &["demo-throughput", "--duration", "300000", "--window", "100000", "--seed", "77",
                  "--switch-at", "150000:SPREADING=64", "--csv", "tp.csv", "--pcap", "tp.pcap"],
                &["decode", "a.iq", "--pcap", "a.pcap"],
            ];
            for c in cmds {
                lrwpan(d, c).unwrap();
            }
            ["a.iq", "a.iq.meta", "a.pcap", "ber.csv", "ack.csv", "ack.pcap", "tp.csv", "tp.pcap"]
                .iter()
                .map(|f| std::fs::read(d.join(f)).unwrap())
                .collect()
        })
        .collect();
    let names = ["a.iq", "a.iq.meta", "a.pcap", "ber.csv", "ack.csv", "ack.pcap", "tp.csv", "tp.pcap"];
    for (i, n) in names.iter().enumerate() {
        check(runs[0][i] == runs[1][i], || format!("{n} differs between runs"))?;
        check(!runs[0][i].is_empty(), || format!("{n} is empty"))?;
    }
    Ok(format!("{} outputs byte-identical across reruns", names.len()))
}

fn irq_kind_of(e: &MasEvent) -> Option<IrqKind> {
    Some(match e {
        MasEvent::SfdDetected { .. } => IrqKind::SfdDetected,
        MasEvent::FrameReceived { .. } => IrqKind::FrameReceived,
        MasEvent::CrcError { .. } => IrqKind::CrcError,
        MasEvent::TxEnd { .. } => IrqKind::TxDone,
        MasEvent::RxOverflow { .. } => IrqKind::RxOverflow,
        MasEvent::Missed { .. } => IrqKind::ScheduledTxMissed,
        _ => return None,
    })
}

fn c11_registers_and_irqs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut rc = RadioController::new(RadioConfig::default()).map_err(|e| e.to_string())?;
    let writable: Vec<Register> = Register::ALL.into_iter().filter(|r| r.access() == Access::ReadWrite).collect();
    for i in 0..1000 {
        let reg = writable[rng.gen_range(0..writable.len())];
        let extended = rc.read(Register::LengthMode) == 1;
        let value: u32 = match reg {
            Register::Spreading => [8, 16, 32, 64][rng.gen_range(0..4)],
            Register::PulseShape => rng.gen_range(0..3),
            Register::PulseParam | Register::DetectThreshold => rng.gen_range(1..=0x1_0000),
            Register::PreambleLen => rng.gen_range(2..=16),
            Register::LengthMode if rc.read(Register::PreambleValue) != 0 => 1,
            Register::LengthMode => rng.gen_range(0..2),
            Register::PreambleValue if !extended => 0,
            Register::Amplitude => rng.gen_range(1..=0x7FFF_FFFF),
            _ => rng.gen(),
        };
        rc.write(reg, value).map_err(|e| format!("write {i} {reg:?}={value:#x}: {e}"))?;
        check(rc.read(reg) == value & reg.mask(), || format!("{reg:?} read back {:#x}", rc.read(reg)))?;
    }

    // Randomized traffic over noisy links, all interrupts enabled on one
    // run and masked on the other.
    let mut raised = [0usize; 6];
    for enabled in [0x3Fu32, 0] {
        let base = RadioConfig {
            irq_enable: enabled,
            mas: MasConfig { rx_capacity: 4, ..Default::default() },
            ..Default::default()
        };
        let mut net = Network::new(11);
        for name in ["a", "b", "c"] {
            net.add_node(name, base).map_err(|e| e.to_string())?;
        }
        for (s, d, snr) in [(0, 1, -6.0), (1, 0, -6.0), (2, 1, 8.0), (1, 2, 8.0), (0, 2, f64::INFINITY)] {
            net.set_link(s, d, LinkModel { chip_snr_db: snr, gain: 0.8, delay_ticks: rng.gen_range(0..20) });
        }
        let mut traffic = ChaCha8Rng::seed_from_u64(111);
        let mut t = 100;
        for k in 0..150u32 {
            let src = traffic.gen_range(0..3);
            let ack = traffic.gen_bool(0.7);
            let mut psdu = Mpdu::new(data_fcf(ack), k as u8, &vec![k as u8; traffic.gen_range(4..60)]).to_bytes();
            if k % 10 == 3 {
                // Sent with a broken FCS so receivers see CRC failures.
                *psdu.last_mut().unwrap() ^= 0x5A;
            }
            let node = net.node_mut(src);
            if let Ok(h) = node.load_packet(&psdu, ack, k as u8) {
                node.set_transmission_time(h, t).map_err(|e| e.to_string())?;
            }
            t += traffic.gen_range(300..4000);
            net.run_until(t - 1);
            if traffic.gen_bool(0.3) {
                for n in 0..3 {
                    while net.node_mut(n).get_packet().is_some() {}
                }
            }
        }
        net.run_until(t + 50_000);
        for n in 0..3 {
            let node = net.node_mut(n);
            let log = node.drain_log();
            let irqs = node.poll_irqs();
            let kinds: Vec<IrqKind> = log.iter().filter_map(irq_kind_of).collect();
            for kind in IrqKind::ALL {
                let events = kinds.iter().filter(|&&k| k == kind).count();
                let got = irqs.iter().filter(|e| e.kind == kind).count();
                let want = if enabled == 0 { 0 } else { events };
                check(got == want, || format!("node {n} {kind:?}: {got} IRQs for {events} events (enable {enabled:#x})"))?;
                if enabled != 0 {
                    raised[kind as usize] += got;
                }
            }
            if enabled != 0 {
                let order: Vec<IrqKind> = irqs.iter().map(|e| e.kind).collect();
                check(order == kinds, || format!("node {n}: IRQ order differs from event order"))?;
            }
        }
    }
    for kind in IrqKind::ALL {
        check(raised[kind as usize] > 0, || format!("traffic never produced {kind:?} ({raised:?})"))?;
    }
    Ok(format!("1000 register round trips exact; IRQs per kind {raised:?} match events, none when masked"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("standard loopback", c1_standard_loopback),
        ("config matrix loopback", c2_config_matrix),
        ("CRC vectors", c3_crc_vectors),
        ("chip table", c4_chip_table),
        ("ACK deadline", c5_ack_deadline),
        ("scheduling exactness", c6_scheduling),
        ("chip error rate vs theory", c7_chip_error_rate),
        ("constant envelope", c8_constant_envelope),
        ("throughput demo", c9_throughput),
        ("determinism", c10_determinism),
        ("registers and IRQs", c11_registers_and_irqs),
    ];
    let results: Vec<Outcome> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria.iter().map(|(_, f)| s.spawn(f)).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("panicked".into())))
            .collect()
    });
    let mut failed = 0;
    for (i, ((name, _), r)) in criteria.iter().zip(&results).enumerate() {
        match r {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
