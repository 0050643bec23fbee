//! CRC-16 frame check sequence engine.
//!
//! Generator x^16 + x^12 + x^5 + 1, zero initial register, bits processed
//! least significant first (the reflected form of CCITT, 0x8408). The result
//! is appended to the MPDU low octet first.

const REFLECTED_POLY: u16 = 0x8408;

const TABLE: [u16; 256] = build_table();

const fn build_table() -> [u16; 256] {
    let mut table = [0u16; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = i as u16;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 1 != 0 {
                (crc >> 1) ^ REFLECTED_POLY
            } else {
                crc >> 1
            };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
}

/// Computes the 16-bit FCS over `data`.
pub fn crc16_fcs(data: &[u8]) -> u16 {
    data.iter().fold(0u16, |crc, &b| {
        (crc >> 8) ^ TABLE[((crc ^ b as u16) & 0xff) as usize]
    })
}

/// Returns `data` with its FCS appended little-endian.
pub fn append_fcs(data: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len() + 2);
    out.extend_from_slice(data);
    out.extend_from_slice(&crc16_fcs(data).to_le_bytes());
    out
}

/// True iff the trailing two octets equal the FCS of everything before them.
pub fn validate_fcs(mpdu: &[u8]) -> bool {
    if mpdu.len() < 2 {
        return false;
    }
    let (body, fcs) = mpdu.split_at(mpdu.len() - 2);
    crc16_fcs(body) == u16::from_le_bytes([fcs[0], fcs[1]])
}
