//! 2450 MHz symbol-to-chip mapping.

use super::config::Spreading;

/// Chip sequence of symbol 0; chip c0 is the most significant bit.
const SYMBOL0: u32 = 0b1101_1001_1100_0011_0101_0010_0010_1110;
/// Chips at odd indices sit on even bit positions.
const ODD_CHIP_MASK: u32 = 0x5555_5555;

/// Standard 32-chip row for `symbol` as a bit pattern (c0 first, MSB).
///
/// Rows 1..=7 are row 0 cyclically shifted right by four chips per step;
/// rows 8..=15 repeat rows 0..=7 with every odd-indexed chip inverted.
pub fn standard_row_bits(symbol: u8) -> u32 {
    let s = (symbol & 0x0f) as u32;
    let base = SYMBOL0.rotate_right(4 * (s & 7));
    if s >= 8 {
        base ^ ODD_CHIP_MASK
    } else {
        base
    }
}

fn bits_to_chips(bits: u32) -> [i8; 32] {
    let mut out = [0i8; 32];
    for (j, c) in out.iter_mut().enumerate() {
        *c = if bits >> (31 - j) & 1 == 1 { 1 } else { -1 };
    }
    out
}

/// The 16 spreading sequences in use for a spreading mode, as ±1 chips.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChipSequenceTable {
    chips_per_symbol: usize,
    chips: Vec<i8>,
}

impl ChipSequenceTable {
    pub fn new(spreading: Spreading) -> Self {
        let cps = spreading.chips_per_symbol();
        let mut chips = Vec::with_capacity(16 * cps);
        for symbol in 0..16u8 {
            let row = bits_to_chips(standard_row_bits(symbol));
            chips.extend((0..cps).map(|j| row[j % 32]));
        }
        ChipSequenceTable { chips_per_symbol: cps, chips }
    }

    pub fn chips_per_symbol(&self) -> usize {
        self.chips_per_symbol
    }

    pub fn row(&self, symbol: u8) -> &[i8] {
        let s = (symbol & 0x0f) as usize;
        &self.chips[s * self.chips_per_symbol..(s + 1) * self.chips_per_symbol]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i8]> {
        self.chips.chunks_exact(self.chips_per_symbol)
    }
}
