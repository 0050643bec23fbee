use super::crc::{crc16_fcs, validate_fcs};
use super::FrameError;

/// MAC frame types carried in FCF bits 0..=2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameType {
    Beacon,
    Data,
    Ack,
    MacCommand,
    Reserved(u8),
}

impl FrameType {
    pub fn from_bits(v: u8) -> Self {
        match v & 0x07 {
            0 => FrameType::Beacon,
            1 => FrameType::Data,
            2 => FrameType::Ack,
            3 => FrameType::MacCommand,
            other => FrameType::Reserved(other),
        }
    }

    pub fn bits(self) -> u8 {
        match self {
            FrameType::Beacon => 0,
            FrameType::Data => 1,
            FrameType::Ack => 2,
            FrameType::MacCommand => 3,
            FrameType::Reserved(v) => v & 0x07,
        }
    }
}

/// Decoded frame control field.
///
/// Addressing modes, frame version and the reserved bits are kept raw so that
/// every 16-bit value decodes and re-encodes to itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FcfFields {
    pub frame_type: FrameType,
    pub security: bool,
    pub frame_pending: bool,
    pub ack_request: bool,
    pub pan_id_compression: bool,
    /// Bits 7..=9.
    pub reserved: u8,
    pub dest_mode: u8,
    pub version: u8,
    pub src_mode: u8,
}

impl FcfFields {
    pub fn decode(fcf: u16) -> Self {
        let bit = |n: u16| fcf & (1 << n) != 0;
        FcfFields {
            frame_type: FrameType::from_bits((fcf & 0x7) as u8),
            security: bit(3),
            frame_pending: bit(4),
            ack_request: bit(5),
            pan_id_compression: bit(6),
            reserved: ((fcf >> 7) & 0x7) as u8,
            dest_mode: ((fcf >> 10) & 0x3) as u8,
            version: ((fcf >> 12) & 0x3) as u8,
            src_mode: ((fcf >> 14) & 0x3) as u8,
        }
    }

    pub fn encode(&self) -> u16 {
        (self.frame_type.bits() as u16)
            | (self.security as u16) << 3
            | (self.frame_pending as u16) << 4
            | (self.ack_request as u16) << 5
            | (self.pan_id_compression as u16) << 6
            | ((self.reserved & 0x7) as u16) << 7
            | ((self.dest_mode & 0x3) as u16) << 10
            | ((self.version & 0x3) as u16) << 12
            | ((self.src_mode & 0x3) as u16) << 14
    }
}

/// FCF and sequence number of an MPDU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacHeader {
    pub fcf: FcfFields,
    pub seq: u8,
}

/// Decodes the frame control field and sequence number.
pub fn parse_fcf(mpdu: &[u8]) -> Result<MacHeader, FrameError> {
    if mpdu.len() < 3 {
        return Err(FrameError::TooShort { len: mpdu.len(), min: 3 });
    }
    Ok(MacHeader {
        fcf: FcfFields::decode(u16::from_le_bytes([mpdu[0], mpdu[1]])),
        seq: mpdu[2],
    })
}

/// MAC protocol data unit. Addressing and payload are carried opaquely in
/// `body`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mpdu {
    pub fcf: u16,
    pub seq: u8,
    pub body: Vec<u8>,
    pub fcs: u16,
}

pub const MIN_MPDU_LEN: usize = 5;

impl Mpdu {
    /// Builds an MPDU with a freshly computed FCS.
    pub fn new(fcf: u16, seq: u8, body: &[u8]) -> Self {
        let mut mpdu = Mpdu { fcf, seq, body: body.to_vec(), fcs: 0 };
        mpdu.fcs = crc16_fcs(&mpdu.header_and_body());
        mpdu
    }

    fn header_and_body(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.body.len() + 3);
        out.extend_from_slice(&self.fcf.to_le_bytes());
        out.push(self.seq);
        out.extend_from_slice(&self.body);
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.header_and_body();
        out.extend_from_slice(&self.fcs.to_le_bytes());
        out
    }

    /// Splits wire bytes into fields; the FCS is taken as-is, not checked.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FrameError> {
        if bytes.len() < MIN_MPDU_LEN {
            return Err(FrameError::TooShort { len: bytes.len(), min: MIN_MPDU_LEN });
        }
        let n = bytes.len();
        Ok(Mpdu {
            fcf: u16::from_le_bytes([bytes[0], bytes[1]]),
            seq: bytes[2],
            body: bytes[3..n - 2].to_vec(),
            fcs: u16::from_le_bytes([bytes[n - 2], bytes[n - 1]]),
        })
    }

    pub fn fields(&self) -> FcfFields {
        FcfFields::decode(self.fcf)
    }

    pub fn fcs_valid(&self) -> bool {
        validate_fcs(&self.to_bytes())
    }
}

/// Immediate acknowledgment: FCF 0x0002 (type Ack, all flags clear), the
/// acknowledged sequence number and the FCS.
pub fn build_ack(seq: u8) -> Mpdu {
    Mpdu::new(FrameType::Ack.bits() as u16, seq, &[])
}

/// Data frame FCF: short destination and source addresses, PAN ID
/// compression, optionally requesting an acknowledgment.
pub fn data_fcf(ack_request: bool) -> u16 {
    FcfFields {
        frame_type: FrameType::Data,
        security: false,
        frame_pending: false,
        ack_request,
        pan_id_compression: true,
        reserved: 0,
        dest_mode: 2,
        version: 0,
        src_mode: 2,
    }
    .encode()
}
