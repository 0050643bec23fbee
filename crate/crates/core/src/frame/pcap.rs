//! Classic libpcap capture writer for MPDUs.

use std::io::{self, Write};

pub const PCAP_MAGIC: u32 = 0xA1B2_C3D4;
/// LINKTYPE_IEEE802_15_4_WITHFCS
pub const LINKTYPE_IEEE802_15_4_WITHFCS: u32 = 195;
pub const SNAPLEN: u32 = 128;

/// Writes a pcap stream (little-endian, microsecond timestamps). MPDUs are
/// expected to include their trailing FCS.
pub struct PcapWriter<W: Write> {
    out: W,
}

impl<W: Write> PcapWriter<W> {
    pub fn new(mut out: W) -> io::Result<Self> {
        out.write_all(&PCAP_MAGIC.to_le_bytes())?;
        out.write_all(&2u16.to_le_bytes())?;
        out.write_all(&4u16.to_le_bytes())?;
        out.write_all(&0i32.to_le_bytes())?; // thiszone
        out.write_all(&0u32.to_le_bytes())?; // sigfigs
        out.write_all(&SNAPLEN.to_le_bytes())?;
        out.write_all(&LINKTYPE_IEEE802_15_4_WITHFCS.to_le_bytes())?;
        Ok(PcapWriter { out })
    }

    /// Appends one record stamped with `tick` microseconds since start.
    pub fn write_frame(&mut self, tick: u64, mpdu: &[u8]) -> io::Result<()> {
        let incl = mpdu.len().min(SNAPLEN as usize);
        self.out.write_all(&((tick / 1_000_000) as u32).to_le_bytes())?;
        self.out.write_all(&((tick % 1_000_000) as u32).to_le_bytes())?;
        self.out.write_all(&(incl as u32).to_le_bytes())?;
        self.out.write_all(&(mpdu.len() as u32).to_le_bytes())?;
        self.out.write_all(&mpdu[..incl])
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
