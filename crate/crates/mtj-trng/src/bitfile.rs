// SPDX-License-Identifier: Apache-2.0

//! Bitstream files: packed binary (LSB-first within each byte) or ASCII
//! `0`/`1` text.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

const ASCII_LINE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Packed,
    Ascii,
}

impl Format {
    /// `.txt` and `.ascii` files are text; everything else is packed.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("txt" | "ascii") => Format::Ascii,
            _ => Format::Packed,
        }
    }
}

pub fn pack(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |b, (i, &x)| b | (u8::from(x) << i))
        })
        .collect()
}

pub fn unpack(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).map(move |i| b >> i & 1 == 1))
        .collect()
}

pub fn to_ascii(bits: &[bool]) -> String {
    let mut s = String::with_capacity(bits.len() + bits.len() / ASCII_LINE + 1);
    for line in bits.chunks(ASCII_LINE) {
        s.extend(line.iter().map(|&b| if b { '1' } else { '0' }));
        s.push('\n');
    }
    s
}

/// Parse `0`/`1` characters, ignoring whitespace.
pub fn from_ascii(text: &str) -> std::result::Result<Vec<bool>, String> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .enumerate()
        .map(|(i, c)| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(format!("unexpected character {other:?} at bit {i}")),
        })
        .collect()
}

pub fn write_bits(path: &Path, bits: &[bool], format: Format) -> Result<()> {
    let data = match format {
        Format::Packed => pack(bits),
        Format::Ascii => to_ascii(bits).into_bytes(),
    };
    fs::write(path, data).map_err(io_err(path))
}

/// Read a bitstream. Packed files are truncated to `n_bits` when given,
/// since the final byte may carry padding.
pub fn read_bits(path: &Path, format: Format, n_bits: Option<usize>) -> Result<Vec<bool>> {
    let raw = fs::read(path).map_err(io_err(path))?;
    let bad = |reason: String| Error::BadBitstream {
        path: path.to_path_buf(),
        reason,
    };
    let mut bits = match format {
        Format::Packed => unpack(&raw),
        Format::Ascii => {
            let text = std::str::from_utf8(&raw).map_err(|e| bad(e.to_string()))?;
            from_ascii(text).map_err(bad)?
        }
    };
    if let Some(n) = n_bits {
        if n > bits.len() {
            return Err(bad(format!("expected {n} bits, file holds {}", bits.len())));
        }
        bits.truncate(n);
    }
    if bits.is_empty() {
        return Err(bad("no bits".into()));
    }
    Ok(bits)
}
