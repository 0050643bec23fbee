use super::chips::ChipSequenceTable;
use super::config::PhyConfig;
use super::pulse::Pulse;
use super::IqBuffer;
use crate::frame::{build_ppdu, FrameError};
use num_complex::Complex64;

/// Standard row for `symbol` under the configured spreading, as ±1 chips.
pub fn chip_sequence(symbol: u8, cfg: &PhyConfig) -> Vec<i8> {
    assert!(symbol < 16, "symbol {symbol} out of range");
    ChipSequenceTable::new(cfg.spreading).row(symbol).to_vec()
}

/// Splits octets into 4-bit symbols, low nibble first.
pub fn octets_to_symbols(octets: &[u8]) -> Vec<u8> {
    octets.iter().flat_map(|&b| [b & 0x0f, b >> 4]).collect()
}

/// Reassembles octets from symbol pairs (low nibble first). A trailing odd
/// symbol is ignored.
pub fn symbols_to_octets(symbols: &[u8]) -> Vec<u8> {
    symbols.chunks_exact(2).map(|p| (p[0] & 0x0f) | (p[1] << 4)).collect()
}

/// Concatenates the chip rows of `symbols`.
pub fn spread(symbols: &[u8], cfg: &PhyConfig) -> Vec<i8> {
    let table = ChipSequenceTable::new(cfg.spreading);
    spread_with(symbols, &table)
}

pub(crate) fn spread_with(symbols: &[u8], table: &ChipSequenceTable) -> Vec<i8> {
    let mut chips = Vec::with_capacity(symbols.len() * table.chips_per_symbol());
    for &s in symbols {
        chips.extend_from_slice(table.row(s));
    }
    chips
}

/// O-QPSK modulation: even chips on I, odd chips on Q, chip `j` starting at
/// sample `j * spc` so the Q rail trails the I rail by one chip period.
pub fn modulate(chips: &[i8], cfg: &PhyConfig) -> IqBuffer {
    let pulse = Pulse::new(cfg.pulse, cfg.samples_per_chip());
    IqBuffer::new(modulate_with(chips, cfg.samples_per_chip(), &pulse, cfg.amplitude), 0)
}

pub(crate) fn modulate_with(chips: &[i8], spc: usize, pulse: &Pulse, amplitude: f64) -> Vec<Complex64> {
    debug_assert!(chips.len().is_multiple_of(2), "O-QPSK needs chip pairs");
    let len = (chips.len() + 1) * spc;
    let mut rails = [vec![0.0f64; len], vec![0.0f64; len]];
    for (j, &c) in chips.iter().enumerate() {
        let rail = &mut rails[j & 1];
        let a = amplitude * c as f64;
        let origin = (j * spc) as isize - pulse.lead as isize;
        for (m, &t) in pulse.taps.iter().enumerate() {
            let n = origin + m as isize;
            if n >= 0 && (n as usize) < len {
                rail[n as usize] += a * t;
            }
        }
    }
    let [i, q] = rails;
    i.into_iter().zip(q).map(|(re, im)| Complex64::new(re, im)).collect()
}

/// Full transmit chain: PPDU framing, spreading and modulation.
pub fn tx_frame(psdu: &[u8], cfg: &PhyConfig) -> Result<IqBuffer, FrameError> {
    let ppdu = build_ppdu(psdu, &cfg.frame)?;
    let chips = spread(&octets_to_symbols(ppdu.as_bytes()), cfg);
    Ok(modulate(&chips, cfg))
}
