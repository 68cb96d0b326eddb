//! Byte-to-text decoding for Praat and CSV inputs.
//!
//! Praat writes UTF-16 with a byte-order mark by default; most other tools
//! write UTF-8. The BOM decides, and BOM-less input is read as UTF-8.

use std::io;
use std::path::Path;

use super::IngestError;

/// Decode raw file bytes, sniffing a UTF-8 or UTF-16 (LE/BE) byte-order mark.
pub fn decode_text(bytes: &[u8]) -> Result<String, IngestError> {
    if let Some(rest) = bytes.strip_prefix(&[0xEF, 0xBB, 0xBF]) {
        return utf8(rest);
    }
    if let Some(rest) = bytes.strip_prefix(&[0xFF, 0xFE]) {
        return utf16(rest, u16::from_le_bytes);
    }
    if let Some(rest) = bytes.strip_prefix(&[0xFE, 0xFF]) {
        return utf16(rest, u16::from_be_bytes);
    }
    utf8(bytes)
}

fn utf8(bytes: &[u8]) -> Result<String, IngestError> {
    String::from_utf8(bytes.to_vec())
        .map_err(|e| IngestError::Encoding(format!("invalid UTF-8: {e}")))
}

fn utf16(bytes: &[u8], word: fn([u8; 2]) -> u16) -> Result<String, IngestError> {
    if !bytes.len().is_multiple_of(2) {
        return Err(IngestError::Encoding("odd byte count in UTF-16 input".into()));
    }
    let units: Vec<u16> = bytes.chunks_exact(2).map(|c| word([c[0], c[1]])).collect();
    String::from_utf16(&units).map_err(|e| IngestError::Encoding(format!("invalid UTF-16: {e}")))
}

/// Read a file from disk and decode it with [`decode_text`].
pub fn read_text_file(path: &Path) -> io::Result<String> {
    let bytes = std::fs::read(path)?;
    decode_text(&bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))
}
