use super::FrameError;

/// aMaxPHYPacketSize for the standard seven-bit PHR.
pub const MAX_PSDU_STANDARD: usize = 127;
/// Upper bound of the two-octet PHR.
pub const MAX_PSDU_EXTENDED: usize = 65_535;

pub const DEFAULT_SFD: u8 = 0xA7;
pub const DEFAULT_PREAMBLE_LEN: usize = 4;
pub const MIN_PREAMBLE_LEN: usize = 2;
pub const MAX_PREAMBLE_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LengthMode {
    /// One-octet PHR, low seven bits carry the PSDU length, bit 7 reserved.
    #[default]
    Standard7Bit,
    /// Two-octet little-endian PHR. Not standard compliant.
    Extended16Bit,
}

impl LengthMode {
    pub fn phr_len(self) -> usize {
        match self {
            LengthMode::Standard7Bit => 1,
            LengthMode::Extended16Bit => 2,
        }
    }

    pub fn max_psdu(self) -> usize {
        match self {
            LengthMode::Standard7Bit => MAX_PSDU_STANDARD,
            LengthMode::Extended16Bit => MAX_PSDU_EXTENDED,
        }
    }
}

/// Layout of the synchronisation header and PHR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameConfig {
    pub preamble_len: usize,
    /// Value of every preamble octet. Must be 0x00 unless the length mode is
    /// extended.
    pub preamble_value: u8,
    pub sfd: u8,
    pub length_mode: LengthMode,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            preamble_len: DEFAULT_PREAMBLE_LEN,
            preamble_value: 0x00,
            sfd: DEFAULT_SFD,
            length_mode: LengthMode::Standard7Bit,
        }
    }
}

impl FrameConfig {
    pub fn validate(&self) -> Result<(), FrameError> {
        if !(MIN_PREAMBLE_LEN..=MAX_PREAMBLE_LEN).contains(&self.preamble_len) {
            return Err(FrameError::InvalidConfig("preamble_len must be within 2..=16"));
        }
        if self.preamble_value != 0 && self.length_mode == LengthMode::Standard7Bit {
            return Err(FrameError::InvalidConfig(
                "custom preamble values require the extended length mode",
            ));
        }
        Ok(())
    }

    /// Octets preceding the PSDU.
    pub fn header_len(&self) -> usize {
        self.preamble_len + 1 + self.length_mode.phr_len()
    }

    /// Total PPDU octets for a PSDU of `psdu_len` octets.
    pub fn ppdu_len(&self, psdu_len: usize) -> usize {
        self.header_len() + psdu_len
    }
}

/// PHY protocol data unit: preamble | SFD | PHR | PSDU.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ppdu {
    bytes: Vec<u8>,
}

impl Ppdu {
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }
}

pub fn build_ppdu(psdu: &[u8], cfg: &FrameConfig) -> Result<Ppdu, FrameError> {
    cfg.validate()?;
    let max = cfg.length_mode.max_psdu();
    if psdu.len() > max {
        return Err(FrameError::LengthOverflow { len: psdu.len(), max });
    }
    let mut bytes = Vec::with_capacity(cfg.ppdu_len(psdu.len()));
    bytes.resize(cfg.preamble_len, cfg.preamble_value);
    bytes.push(cfg.sfd);
    match cfg.length_mode {
        LengthMode::Standard7Bit => bytes.push(psdu.len() as u8 & 0x7f),
        LengthMode::Extended16Bit => bytes.extend_from_slice(&(psdu.len() as u16).to_le_bytes()),
    }
    bytes.extend_from_slice(psdu);
    Ok(Ppdu { bytes })
}

/// Decodes the PHR octets, returning the PSDU length they announce.
pub fn decode_phr(phr: &[u8], mode: LengthMode) -> usize {
    match mode {
        LengthMode::Standard7Bit => (phr[0] & 0x7f) as usize,
        LengthMode::Extended16Bit => u16::from_le_bytes([phr[0], phr[1]]) as usize,
    }
}

/// Parses a PPDU that starts at its first preamble octet. Returns the PSDU
/// and the number of octets consumed.
pub fn parse_ppdu(bytes: &[u8], cfg: &FrameConfig) -> Result<(Vec<u8>, usize), FrameError> {
    let header = cfg.header_len();
    if bytes.len() < header {
        return Err(FrameError::Truncated { needed: header, available: bytes.len() });
    }
    if bytes[cfg.preamble_len] != cfg.sfd {
        return Err(FrameError::BadSfd { expected: cfg.sfd, found: bytes[cfg.preamble_len] });
    }
    let psdu_len = decode_phr(&bytes[cfg.preamble_len + 1..header], cfg.length_mode);
    let total = header + psdu_len;
    if bytes.len() < total {
        return Err(FrameError::Truncated { needed: total, available: bytes.len() });
    }
    Ok((bytes[header..total].to_vec(), total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_octet_layout() {
        let ppdu = build_ppdu(&[0xAA], &FrameConfig::default()).unwrap();
        assert_eq!(ppdu.as_bytes(), &[0x00, 0x00, 0x00, 0x00, 0xA7, 0x01, 0xAA]);
    }

    #[test]
    fn max_standard_length() {
        let cfg = FrameConfig::default();
        assert_eq!(build_ppdu(&[0u8; 127], &cfg).unwrap().len(), 133);
        assert_eq!(
            build_ppdu(&[0u8; 128], &cfg),
            Err(FrameError::LengthOverflow { len: 128, max: 127 })
        );
    }

    #[test]
    fn extended_phr_is_little_endian() {
        let cfg = FrameConfig { length_mode: LengthMode::Extended16Bit, ..Default::default() };
        let psdu = vec![0x5a; 300];
        let ppdu = build_ppdu(&psdu, &cfg).unwrap();
        assert_eq!(&ppdu.as_bytes()[5..7], &[0x2c, 0x01]);
        assert_eq!(parse_ppdu(ppdu.as_bytes(), &cfg).unwrap(), (psdu, 307));
    }

    #[test]
    fn bad_sfd_and_truncation() {
        let cfg = FrameConfig::default();
        assert!(matches!(
            parse_ppdu(&[0, 0, 0, 0, 0xA8, 0x01, 0xAA], &cfg),
            Err(FrameError::BadSfd { expected: 0xA7, found: 0xA8 })
        ));
        assert!(matches!(
            parse_ppdu(&[0, 0, 0, 0, 0xA7, 0x05, 0xAA], &cfg),
            Err(FrameError::Truncated { .. })
        ));
        assert!(matches!(parse_ppdu(&[0, 0, 0], &cfg), Err(FrameError::Truncated { .. })));
    }

    #[test]
    fn config_validation() {
        let mut cfg = FrameConfig { preamble_len: 1, ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg.preamble_len = 17;
        assert!(cfg.validate().is_err());
        cfg.preamble_len = 16;
        assert!(cfg.validate().is_ok());
        cfg.preamble_value = 0x55;
        assert!(cfg.validate().is_err());
        cfg.length_mode = LengthMode::Extended16Bit;
        assert!(cfg.validate().is_ok());
    }

    fn frame_config() -> impl Strategy<Value = FrameConfig> {
        (2usize..=16, any::<u8>(), any::<u8>(), any::<bool>()).prop_map(|(p, v, sfd, ext)| {
            let length_mode = if ext { LengthMode::Extended16Bit } else { LengthMode::Standard7Bit };
            FrameConfig {
                preamble_len: p,
                preamble_value: if ext { v } else { 0 },
                sfd,
                length_mode,
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn round_trip(cfg in frame_config(), psdu in proptest::collection::vec(any::<u8>(), 0..=127)) {
            let ppdu = build_ppdu(&psdu, &cfg).unwrap();
            prop_assert_eq!(ppdu.len(), cfg.preamble_len + 1 + cfg.length_mode.phr_len() + psdu.len());
            let phr = &ppdu.as_bytes()[cfg.preamble_len + 1..cfg.header_len()];
            prop_assert_eq!(decode_phr(phr, cfg.length_mode), psdu.len());
            let (out, used) = parse_ppdu(ppdu.as_bytes(), &cfg).unwrap();
            prop_assert_eq!(out, psdu);
            prop_assert_eq!(used, ppdu.len());
        }
    }
}
