use anyhow::{bail, Context, Result};
use clap::Args;
use lrwpan_core::kv;
use lrwpan_core::phy::iqfile::{parse_length_mode, parse_pulse};
use lrwpan_core::{PhyConfig, PulseShape, Spreading};

/// PHY settings shared by every command. Unset flags keep the value from
/// the sidecar (decode) or the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct PhyArgs {
    /// Chips per symbol: 8, 16, 32 (standard) or 64.
    #[arg(long)]
    pub sf: Option<usize>,
    /// Pulse shape: halfsine, rect or rc.
    #[arg(long)]
    pub pulse: Option<String>,
    /// Raised-cosine rolloff in (0, 1].
    #[arg(long)]
    pub rolloff: Option<f64>,
    /// Preamble octets (2..=16).
    #[arg(long)]
    pub preamble_len: Option<usize>,
    /// Preamble octet value (extended length mode only).
    #[arg(long, value_parser = parse_u8)]
    pub preamble_value: Option<u8>,
    #[arg(long, value_parser = parse_u8)]
    pub sfd: Option<u8>,
    /// standard (7-bit PHR) or extended (16-bit PHR).
    #[arg(long)]
    pub length_mode: Option<String>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Preamble correlation threshold in (0, 1].
    #[arg(long)]
    pub threshold: Option<f64>,
}

impl PhyArgs {
    pub fn apply(&self, mut cfg: PhyConfig) -> Result<PhyConfig> {
        if let Some(n) = self.sf {
            cfg.spreading = Spreading::from_chips(n)?;
        }
        if let Some(r) = self.rolloff {
            if let PulseShape::RaisedCosine(_) = cfg.pulse {
                cfg.pulse = PulseShape::RaisedCosine(r);
            }
        }
        if let Some(name) = &self.pulse {
            let r = match (self.rolloff, cfg.pulse) {
                (Some(r), _) => r,
                (None, PulseShape::RaisedCosine(r)) => r,
                _ => 0.5,
            };
            cfg.pulse = parse_pulse(name, r).with_context(|| format!("unknown pulse shape {name:?}"))?;
        }
        if let Some(n) = self.preamble_len {
            cfg.frame.preamble_len = n;
        }
        if let Some(v) = self.preamble_value {
            cfg.frame.preamble_value = v;
        }
        if let Some(v) = self.sfd {
            cfg.frame.sfd = v;
        }
        if let Some(m) = &self.length_mode {
            cfg.frame.length_mode = parse_length_mode(m).with_context(|| format!("unknown length mode {m:?}"))?;
        }
        if let Some(a) = self.amplitude {
            cfg.amplitude = a;
        }
        if let Some(t) = self.threshold {
            cfg.detect_threshold = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_u8(s: &str) -> Result<u8, String> {
    kv::parse_uint(s).and_then(|v| u8::try_from(v).ok()).ok_or_else(|| format!("expected an octet, got {s:?}"))
}

/// Comma-separated chip SNRs in dB; `inf` means noiseless.
pub fn parse_snr_list(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| kv::parse_f64(x).filter(|v| !v.is_nan()).with_context(|| format!("bad SNR {x:?}")))
        .collect::<Result<_>>()?;
    if v.is_empty() {
        bail!("empty SNR list");
    }
    Ok(v)
}

/// Hex PSDU; spaces, colons and a leading `0x` are ignored.
pub fn parse_hex(s: &str) -> Result<Vec<u8>> {
    let cleaned: String = s.trim().trim_start_matches("0x").chars().filter(|c| !matches!(c, ' ' | ':' | '_')).collect();
    hex::decode(&cleaned).with_context(|| format!("invalid hex PSDU {s:?}"))
}
