use super::{csv_header, sub_seed, ExperimentError};
use crate::controller::RadioConfig;
use crate::frame::{append_fcs, build_ppdu};
use crate::medium::{LinkModel, Medium};
use crate::phy::{octets_to_symbols, rx_frames, soft_chips, spread, tx_frame, PhyConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct BerParams {
    pub snr_db: Vec<f64>,
    pub frames: usize,
    /// Including the two FCS octets.
    pub psdu_len: usize,
    pub phy: PhyConfig,
    pub seed: u64,
}

impl Default for BerParams {
    fn default() -> Self {
        BerParams {
            snr_db: vec![0.0, 2.0, 4.32, 6.0, f64::INFINITY],
            frames: 120,
            psdu_len: 127,
            phy: PhyConfig::default(),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BerPoint {
    pub snr_db: f64,
    pub chips: u64,
    pub chip_errors: u64,
    pub frames: u64,
    pub frame_errors: u64,
    lqi_sum: u64,
    lqi_count: u64,
}

impl BerPoint {
    pub fn cer(&self) -> f64 {
        self.chip_errors as f64 / self.chips.max(1) as f64
    }

    pub fn per(&self) -> f64 {
        self.frame_errors as f64 / self.frames.max(1) as f64
    }

    /// Mean LQI over frames whose SFD was found; 0 when none was.
    pub fn lqi_mean(&self) -> f64 {
        if self.lqi_count == 0 {
            0.0
        } else {
            self.lqi_sum as f64 / self.lqi_count as f64
        }
    }
}

/// Idle ticks rendered on each side of a frame.
const GUARD_TICKS: u64 = 8;

/// Monte Carlo at one chip SNR. Chip errors are counted with a genie
/// receiver that knows the frame timing and phase (hard sign decision on
/// each matched-filter output); packet errors and LQI come from the full
/// receive chain.
pub fn ber_point(snr_db: f64, frames: usize, psdu_len: usize, phy: &PhyConfig, seed: u64) -> Result<BerPoint, ExperimentError> {
    phy.validate().map_err(|e| ExperimentError::Param(e.to_string()))?;
    if psdu_len < 2 {
        return Err(ExperimentError::Param("PSDU must hold at least the FCS".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut medium = Medium::new(seed);
    let tx = medium.attach_node(&[]);
    let rx = medium.attach_node(&[]);
    medium.set_link(tx, rx, LinkModel::with_snr(snr_db));
    medium.set_rx_phy(rx, *phy);
    let mut point = BerPoint { snr_db, ..Default::default() };
    let spc = phy.samples_per_chip();
    let mut start = 100;
    for _ in 0..frames {
        let body: Vec<u8> = (0..psdu_len - 2).map(|_| rng.gen()).collect();
        let psdu = append_fcs(&body);
        let mut iq = tx_frame(&psdu, phy)?;
        iq.start_tick = start;
        let end = start + iq.duration_ticks();
        medium.transmit(tx, iq);
        let seg = medium.render(rx, start - GUARD_TICKS, end + GUARD_TICKS);

        let ppdu = build_ppdu(&psdu, &phy.frame)?;
        let chips = spread(&octets_to_symbols(ppdu.as_bytes()), phy);
        let inv = Complex64::new(1.0 / phy.amplitude, 0.0);
        let soft = soft_chips(&seg.samples, (GUARD_TICKS * 8) as usize, 0, chips.len(), inv, phy);
        point.chips += chips.len() as u64;
        point.chip_errors += chips.iter().zip(&soft).filter(|(&c, &y)| (c as f64) * y <= 0.0).count() as u64;

        let decoded = rx_frames(&seg, phy);
        if let Some(f) = decoded.iter().find(|f| f.report.sfd_found) {
            point.lqi_sum += f.report.lqi as u64;
            point.lqi_count += 1;
        }
        point.frames += 1;
        if !decoded.iter().any(|f| f.report.crc_ok && f.psdu == psdu) {
            point.frame_errors += 1;
        }
        medium.prune(end + 1);
        start = end + 2 * GUARD_TICKS + spc as u64;
    }
    Ok(point)
}

/// Runs every SNR point on its own thread with its own medium and seed.
pub fn run_ber(params: &BerParams) -> Result<Vec<BerPoint>, ExperimentError> {
    if params.snr_db.is_empty() {
        return Err(ExperimentError::Param("no SNR points".into()));
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = params
            .snr_db
            .iter()
            .enumerate()
            .map(|(i, &snr)| {
                let seed = sub_seed(params.seed, i as u64);
                s.spawn(move || ber_point(snr, params.frames, params.psdu_len, &params.phy, seed))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("BER worker panicked")).collect()
    })
}

impl BerParams {
    pub fn csv(&self, points: &[BerPoint]) -> String {
        let cfg = RadioConfig { phy: self.phy, ..Default::default() };
        let extra = [("frames", self.frames.to_string()), ("psdu_len", self.psdu_len.to_string())];
        let mut s = csv_header("ber", self.seed, &cfg, &extra);
        s.push_str("snr_db,cer,per,lqi_mean\n");
        for p in points {
            s.push_str(&format!("{},{:.6e},{:.6e},{:.3}\n", p.snr_db, p.cer(), p.per(), p.lqi_mean()));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_point_is_error_free() {
        let p = ber_point(f64::INFINITY, 5, 40, &PhyConfig::default(), 3).unwrap();
        assert_eq!(p.chip_errors, 0);
        assert_eq!(p.frame_errors, 0);
        assert_eq!(p.lqi_mean(), 255.0);
        assert_eq!(p.chips, 5 * (6 + 40) * 2 * 32);
    }

    #[test]
    fn sweep_is_deterministic() {
        let params = BerParams { snr_db: vec![3.0, 8.0], frames: 3, psdu_len: 20, ..Default::default() };
        let a = params.csv(&run_ber(&params).unwrap());
        let b = params.csv(&run_ber(&params).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with("# lrwpan "));
        assert!(a.contains("# seed=1\n"));
        assert!(a.contains("snr_db,cer,per,lqi_mean\n"));
    }

    #[test]
    fn errors_fall_with_snr() {
        let phy = PhyConfig::default();
        let lo = ber_point(0.0, 4, 60, &phy, 1).unwrap();
        let hi = ber_point(6.0, 4, 60, &phy, 1).unwrap();
        assert!(lo.cer() > hi.cer());
        assert!(lo.cer() > 0.05);
    }
}
