//! Raw IQ capture files and their `key=value` sidecar.
//!
//! Samples are interleaved little-endian `f32` pairs (I, Q) with no header.

use super::config::{PhyConfig, PulseShape, Spreading};
use super::IqBuffer;
use crate::frame::{FrameConfig, LengthMode};
use crate::kv::{self, KvError, KvSection};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IqFileError {
    #[error("IQ data length {0} is not a multiple of 8 bytes")]
    Length(usize),
    #[error("sidecar: {0}")]
    Sidecar(#[from] KvError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn encode_iq(samples: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 8);
    for s in samples {
        out.extend_from_slice(&(s.re as f32).to_le_bytes());
        out.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    out
}

pub fn decode_iq(bytes: &[u8]) -> Result<Vec<Complex64>, IqFileError> {
    if !bytes.len().is_multiple_of(8) {
        return Err(IqFileError::Length(bytes.len()));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect())
}

/// `key=value` lines describing a PHY configuration.
pub fn config_entries(cfg: &PhyConfig) -> Vec<(&'static str, String)> {
    let rolloff = match cfg.pulse {
        PulseShape::RaisedCosine(r) => r,
        _ => 0.5,
    };
    vec![
        ("sample_rate_hz", cfg.sample_rate_hz.to_string()),
        ("chip_rate_hz", cfg.chip_rate_hz.to_string()),
        ("spreading", cfg.chips_per_symbol().to_string()),
        ("pulse", cfg.pulse.name().to_string()),
        ("rolloff", rolloff.to_string()),
        ("preamble_len", cfg.frame.preamble_len.to_string()),
        ("preamble_value", format!("{:#04x}", cfg.frame.preamble_value)),
        ("sfd", format!("{:#04x}", cfg.frame.sfd)),
        (
            "length_mode",
            match cfg.frame.length_mode {
                LengthMode::Standard7Bit => "standard".into(),
                LengthMode::Extended16Bit => "extended".into(),
            },
        ),
        ("amplitude", cfg.amplitude.to_string()),
        ("detect_threshold", cfg.detect_threshold.to_string()),
        ("standard_compliant", cfg.is_standard_compliant().to_string()),
    ]
}

/// Renders the sidecar text for a capture.
pub fn sidecar_text(iq: &IqBuffer, cfg: &PhyConfig) -> String {
    let mut s = String::from("# IQ capture: interleaved f32le I/Q\n");
    s.push_str(&format!("start_tick={}\n", iq.start_tick));
    s.push_str(&format!("samples={}\n", iq.len()));
    for (k, v) in config_entries(cfg) {
        s.push_str(&format!("{k}={v}\n"));
    }
    s
}

pub fn parse_pulse(name: &str, rolloff: f64) -> Option<PulseShape> {
    match name {
        "halfsine" | "half-sine" => Some(PulseShape::HalfSine),
        "rect" => Some(PulseShape::Rect),
        "rc" | "raised-cosine" => Some(PulseShape::RaisedCosine(rolloff)),
        _ => None,
    }
}

pub fn parse_length_mode(name: &str) -> Option<LengthMode> {
    match name {
        "standard" | "7bit" => Some(LengthMode::Standard7Bit),
        "extended" | "16bit" => Some(LengthMode::Extended16Bit),
        _ => None,
    }
}

/// Reads a PHY configuration from a section; absent keys keep defaults.
pub fn config_from_section(section: &KvSection) -> Result<PhyConfig, KvError> {
    let mut cfg = PhyConfig::default();
    let mut frame = FrameConfig::default();
    let bad = |line: usize, key: &str, v: &str| KvError::new(line, format!("bad value {v:?} for {key}"));
    let num = |key: &str| -> Result<Option<u64>, KvError> {
        section
            .get(key)
            .map(|e| kv::parse_uint(&e.value).ok_or_else(|| bad(e.line, key, &e.value)))
            .transpose()
    };
    let float = |key: &str| -> Result<Option<f64>, KvError> {
        section
            .get(key)
            .map(|e| kv::parse_f64(&e.value).ok_or_else(|| bad(e.line, key, &e.value)))
            .transpose()
    };
    if let Some(v) = num("sample_rate_hz")? {
        cfg.sample_rate_hz = v as u32;
    }
    if let Some(v) = num("chip_rate_hz")? {
        cfg.chip_rate_hz = v as u32;
    }
    if let Some(e) = section.get("spreading") {
        let n = kv::parse_uint(&e.value).ok_or_else(|| bad(e.line, "spreading", &e.value))?;
        cfg.spreading = Spreading::from_chips(n as usize).map_err(|err| KvError::new(e.line, err.to_string()))?;
    }
    let rolloff = float("rolloff")?.unwrap_or(0.5);
    if let Some(e) = section.get("pulse") {
        cfg.pulse = parse_pulse(&e.value, rolloff).ok_or_else(|| bad(e.line, "pulse", &e.value))?;
    }
    if let Some(v) = num("preamble_len")? {
        frame.preamble_len = v as usize;
    }
    if let Some(v) = num("preamble_value")? {
        frame.preamble_value = v as u8;
    }
    if let Some(v) = num("sfd")? {
        frame.sfd = v as u8;
    }
    if let Some(e) = section.get("length_mode") {
        frame.length_mode = parse_length_mode(&e.value).ok_or_else(|| bad(e.line, "length_mode", &e.value))?;
    }
    cfg.frame = frame;
    if let Some(v) = float("amplitude")? {
        cfg.amplitude = v;
    }
    if let Some(v) = float("detect_threshold")? {
        cfg.detect_threshold = v;
    }
    cfg.validate().map_err(|e| KvError::new(section.line, e.to_string()))?;
    Ok(cfg)
}

/// Parses sidecar text into the start tick and PHY configuration.
pub fn parse_sidecar(text: &str) -> Result<(u64, PhyConfig), KvError> {
    let doc = kv::parse(text)?;
    let global = &doc[0];
    let start_tick = match global.get("start_tick") {
        Some(e) => kv::parse_uint(&e.value).ok_or_else(|| KvError::new(e.line, "bad start_tick"))?,
        None => 0,
    };
    Ok((start_tick, config_from_section(global)?))
}
