//! Line-oriented `key=value` text with optional `[section]` headers and `#`
//! comments. Shared by the IQ sidecar, topology and register dump formats.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct KvError {
    pub line: usize,
    pub message: String,
}

impl KvError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        KvError { line, message: message.into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvSection {
    pub name: String,
    /// Line number of the header, 0 for the implicit global section.
    pub line: usize,
    pub entries: Vec<KvEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KvEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

impl KvSection {
    pub fn get(&self, key: &str) -> Option<&KvEntry> {
        self.entries.iter().rev().find(|e| e.key == key)
    }
}

/// Parses a document. Entries before the first header land in a section
/// with an empty name, which is always present at index 0.
pub fn parse(text: &str) -> Result<Vec<KvSection>, KvError> {
    let mut sections = vec![KvSection::default()];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| KvError::new(line, "unterminated section header"))?;
            sections.push(KvSection { name: name.trim().to_string(), line, entries: Vec::new() });
            continue;
        }
        let (k, v) = trimmed
            .split_once('=')
            .ok_or_else(|| KvError::new(line, format!("expected key=value, got {trimmed:?}")))?;
        let key = k.trim();
        if key.is_empty() {
            return Err(KvError::new(line, "empty key"));
        }
        sections.last_mut().unwrap().entries.push(KvEntry {
            key: key.to_string(),
            value: v.trim().to_string(),
            line,
        });
    }
    Ok(sections)
}

/// Parses an unsigned integer in decimal or `0x` hexadecimal.
pub fn parse_uint(s: &str) -> Option<u64> {
    let s = s.trim().replace('_', "");
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

pub fn parse_bool(s: &str) -> Option<bool> {
    match s.trim() {
        "1" | "true" | "yes" | "on" => Some(true),
        "0" | "false" | "no" | "off" => Some(false),
        _ => None,
    }
}

/// Accepts `inf` / `+inf` / `infinity` as positive infinity.
pub fn parse_f64(s: &str) -> Option<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
        other => other.parse().ok(),
    }
}
