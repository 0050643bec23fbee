use super::chips::ChipSequenceTable;
use super::config::PhyConfig;
use super::pulse::Pulse;
use super::tx::{modulate_with, octets_to_symbols, spread_with, symbols_to_octets};
use super::IqBuffer;
use crate::frame::{decode_phr, validate_fcs};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Preamble correlation peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncCandidate {
    pub sample_offset: usize,
    /// Argument of the complex correlation at the peak.
    pub phase_estimate: f64,
    /// Correlation normalised by both window norms, in [0, 1].
    pub metric: f64,
    /// Received amplitude relative to the unit-amplitude reference.
    pub gain: f64,
}

/// Receive-side parameters reported for every decode attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyReport {
    /// Mean power over the frame, dB relative to unit power.
    pub rssi_db: f64,
    pub lqi: u8,
    pub sync_sample_offset: usize,
    pub phase_estimate_rad: f64,
    pub sfd_found: bool,
    pub crc_ok: bool,
    /// Samples spanned by the frame (known once the PHR is decoded).
    pub frame_samples: usize,
    pub config_snapshot: PhyConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RxFrame {
    /// Decoded PSDU; empty unless the PHR was decoded and the frame fit the
    /// buffer.
    pub psdu: Vec<u8>,
    pub report: PhyReport,
}

/// Unit-amplitude waveform of the preamble alone.
pub fn preamble_reference(cfg: &PhyConfig) -> Vec<Complex64> {
    let spc = cfg.samples_per_chip();
    let table = ChipSequenceTable::new(cfg.spreading);
    let octets = vec![cfg.frame.preamble_value; cfg.frame.preamble_len];
    let chips = spread_with(&octets_to_symbols(&octets), &table);
    let mut wave = modulate_with(&chips, spc, &Pulse::new(cfg.pulse, spc), 1.0);
    wave.truncate(chips.len() * spc);
    wave
}

/// Cross-correlates `iq` with the preamble waveform and returns the peaks
/// whose normalised metric reaches the detection threshold, strongest
/// first. Peaks closer than one preamble length to a stronger one are
/// dropped.
pub fn detect_preamble(iq: &IqBuffer, cfg: &PhyConfig) -> Vec<SyncCandidate> {
    let reference = preamble_reference(cfg);
    detect_with(&iq.samples, &reference, cfg.detect_threshold)
}

fn detect_with(r: &[Complex64], reference: &[Complex64], threshold: f64) -> Vec<SyncCandidate> {
    let n = r.len();
    let l = reference.len();
    if l == 0 || n < l {
        return Vec::new();
    }
    let ref_energy: f64 = reference.iter().map(|s| s.norm_sqr()).sum();
    let corr = cross_correlate(r, reference);

    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0f64);
    let mut acc = 0.0;
    for s in r {
        acc += s.norm_sqr();
        prefix.push(acc);
    }
    let lags = n - l + 1;
    let window: Vec<f64> = (0..lags).map(|k| (prefix[k + l] - prefix[k]).max(0.0)).collect();
    let floor = window.iter().cloned().fold(0.0, f64::max) * 1e-12;
    let ref_norm = ref_energy.sqrt();
    let metric: Vec<f64> = (0..lags)
        .map(|k| {
            if window[k] <= floor || window[k] == 0.0 {
                0.0
            } else {
                corr[k].norm() / (ref_norm * window[k].sqrt())
            }
        })
        .collect();

    let mut peaks: Vec<SyncCandidate> = (0..lags)
        .filter(|&k| {
            let m = metric[k];
            m >= threshold
                && (k == 0 || m >= metric[k - 1])
                && (k + 1 == lags || m > metric[k + 1])
        })
        .map(|k| SyncCandidate {
            sample_offset: k,
            phase_estimate: corr[k].arg(),
            metric: metric[k],
            gain: corr[k].norm() / ref_energy,
        })
        .collect();
    peaks.sort_by(|a, b| {
        b.metric.total_cmp(&a.metric).then(a.sample_offset.cmp(&b.sample_offset))
    });
    let mut kept: Vec<SyncCandidate> = Vec::new();
    for p in peaks {
        if kept.iter().all(|k| k.sample_offset.abs_diff(p.sample_offset) >= l) {
            kept.push(p);
        }
    }
    kept
}

/// `out[k] = sum_m r[k + m] * conj(reference[m])` for every full-overlap lag.
fn cross_correlate(r: &[Complex64], reference: &[Complex64]) -> Vec<Complex64> {
    let size = (r.len() + reference.len()).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut a = vec![Complex64::new(0.0, 0.0); size];
    a[..r.len()].copy_from_slice(r);
    let mut b = vec![Complex64::new(0.0, 0.0); size];
    b[..reference.len()].copy_from_slice(reference);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y.conj();
    }
    inv.process(&mut a);
    let scale = 1.0 / size as f64;
    a.truncate(r.len() - reference.len() + 1);
    a.iter_mut().for_each(|v| *v *= scale);
    a
}

/// Matched-filter outputs for chips `first_chip..first_chip + count` of a
/// burst starting at sample `offset`, after multiplying the input by
/// `rotation`. A noiseless unit-amplitude chip yields exactly ±1 for
/// half-sine and rectangular pulses.
pub fn soft_chips(
    samples: &[Complex64],
    offset: usize,
    first_chip: usize,
    count: usize,
    rotation: Complex64,
    cfg: &PhyConfig,
) -> Vec<f64> {
    let spc = cfg.samples_per_chip();
    let pulse = Pulse::new(cfg.pulse, spc);
    let mut out = Vec::with_capacity(count);
    soft_chips_into(samples, offset, first_chip, count, rotation, spc, &pulse, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn soft_chips_into(
    samples: &[Complex64],
    offset: usize,
    first_chip: usize,
    count: usize,
    rotation: Complex64,
    spc: usize,
    pulse: &Pulse,
    out: &mut Vec<f64>,
) {
    let n = samples.len() as isize;
    for j in first_chip..first_chip + count {
        let origin = (offset + j * spc) as isize - pulse.lead as isize;
        let mut acc = 0.0;
        for (m, &t) in pulse.taps.iter().enumerate() {
            let idx = origin + m as isize;
            if idx < 0 || idx >= n {
                continue;
            }
            let v = samples[idx as usize] * rotation;
            acc += t * if j & 1 == 0 { v.re } else { v.im };
        }
        out.push(acc / pulse.energy);
    }
}

/// Correlates one symbol's soft chips against all 16 rows. Returns the best
/// row and its correlation divided by the chip count; ties go to the lowest
/// symbol.
pub fn despread_hard(chips: &[f64], cfg: &PhyConfig) -> (u8, f64) {
    despread(chips, &ChipSequenceTable::new(cfg.spreading))
}

pub(crate) fn despread(chips: &[f64], table: &ChipSequenceTable) -> (u8, f64) {
    assert_eq!(chips.len(), table.chips_per_symbol(), "one symbol of chips expected");
    let mut best = (0u8, f64::NEG_INFINITY);
    for (s, row) in table.rows().enumerate() {
        let corr: f64 = row.iter().zip(chips).map(|(&c, &y)| c as f64 * y).sum();
        if corr > best.1 {
            best = (s as u8, corr);
        }
    }
    (best.0, best.1 / chips.len() as f64)
}

struct Demod<'a> {
    samples: &'a [Complex64],
    cfg: &'a PhyConfig,
    table: ChipSequenceTable,
    pulse: Pulse,
    spc: usize,
    scratch: Vec<f64>,
}

impl Demod<'_> {
    fn symbols(&mut self, offset: usize, rotation: Complex64, first: usize, count: usize, scores: &mut Vec<f64>) -> Vec<u8> {
        let cps = self.table.chips_per_symbol();
        let mut out = Vec::with_capacity(count);
        for s in first..first + count {
            self.scratch.clear();
            soft_chips_into(self.samples, offset, s * cps, cps, rotation, self.spc, &self.pulse, &mut self.scratch);
            let (sym, score) = despread(&self.scratch, &self.table);
            out.push(sym);
            scores.push(score);
        }
        out
    }

    fn decode(&mut self, cand: &SyncCandidate) -> RxFrame {
        let cfg = self.cfg;
        let frame = &cfg.frame;
        let cps = self.table.chips_per_symbol();
        let offset = cand.sample_offset;
        let rotation = Complex64::from_polar(1.0 / cand.gain.max(f64::MIN_POSITIVE), -cand.phase_estimate);
        let mut scores = Vec::new();
        let mut report = PhyReport {
            rssi_db: f64::NEG_INFINITY,
            lqi: 0,
            sync_sample_offset: offset,
            phase_estimate_rad: cand.phase_estimate,
            sfd_found: false,
            crc_ok: false,
            frame_samples: 0,
            config_snapshot: *cfg,
        };

        let pre_syms = 2 * frame.preamble_len;
        let phr_syms = 2 * frame.length_mode.phr_len();
        let header_syms = pre_syms + 2 + phr_syms;
        let header_samples = (header_syms * cps + 1) * self.spc;
        if offset + header_samples > self.samples.len() {
            report.frame_samples = self.samples.len() - offset;
            return self.finish(report, Vec::new(), &scores);
        }
        let sfd = symbols_to_octets(&self.symbols(offset, rotation, pre_syms, 2, &mut scores))[0];
        if sfd != frame.sfd {
            report.frame_samples = (pre_syms + 2) * cps * self.spc;
            return self.finish(report, Vec::new(), &scores);
        }
        report.sfd_found = true;
        let phr = symbols_to_octets(&self.symbols(offset, rotation, pre_syms + 2, phr_syms, &mut scores));
        let psdu_len = decode_phr(&phr, frame.length_mode);
        let total_chips = (header_syms + 2 * psdu_len) * cps;
        report.frame_samples = (total_chips + 1) * self.spc;
        if offset + report.frame_samples > self.samples.len() {
            return self.finish(report, Vec::new(), &scores);
        }
        let psdu = symbols_to_octets(&self.symbols(offset, rotation, header_syms, 2 * psdu_len, &mut scores));
        report.crc_ok = psdu.len() < 2 || validate_fcs(&psdu);
        self.finish(report, psdu, &scores)
    }

    fn finish(&self, mut report: PhyReport, psdu: Vec<u8>, scores: &[f64]) -> RxFrame {
        let start = report.sync_sample_offset;
        let end = (start + report.frame_samples).min(self.samples.len());
        if end > start {
            let p: f64 = self.samples[start..end].iter().map(|s| s.norm_sqr()).sum::<f64>() / (end - start) as f64;
            report.rssi_db = 10.0 * p.log10();
        }
        if !scores.is_empty() {
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            report.lqi = (255.0 * mean).round().clamp(0.0, 255.0) as u8;
        }
        RxFrame { psdu, report }
    }
}

/// Full receive chain: preamble search, phase and gain removal, per-symbol
/// matched-filter despreading, SFD/PHR/PSDU decoding and FCS check.
///
/// Candidates are tried in time order; once an SFD is found the rest of
/// that frame is not searched again. Results are in time order, one per
/// attempt.
pub fn rx_frames(iq: &IqBuffer, cfg: &PhyConfig) -> Vec<RxFrame> {
    let mut candidates = detect_preamble(iq, cfg);
    candidates.sort_by_key(|c| c.sample_offset);
    let spc = cfg.samples_per_chip();
    let mut demod = Demod {
        samples: &iq.samples,
        cfg,
        table: ChipSequenceTable::new(cfg.spreading),
        pulse: Pulse::new(cfg.pulse, spc),
        spc,
        scratch: Vec::new(),
    };
    let mut busy_until = 0;
    let mut out = Vec::new();
    for cand in &candidates {
        if cand.sample_offset < busy_until {
            continue;
        }
        let frame = demod.decode(cand);
        if frame.report.sfd_found {
            busy_until = cand.sample_offset + frame.report.frame_samples;
        }
        out.push(frame);
    }
    out
}
