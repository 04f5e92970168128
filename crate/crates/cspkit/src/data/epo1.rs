//! The EPO1 binary format for labeled epoch collections.
//!
//! Little-endian layout:
//!
//! | bytes      | content                         |
//! |------------|---------------------------------|
//! | 0–3        | ASCII magic `EPO1`              |
//! | 4–7        | u32 version (currently 1)       |
//! | 8–11       | u32 epoch count N               |
//! | 12–15      | u32 channel count C             |
//! | 16–19      | u32 samples per channel T       |
//! | 20–23      | f32 sample rate in Hz           |
//! | 24..24+N   | one label byte per epoch, 0 / 1 |
//! | rest       | N·C·T f32 samples               |
//!
//! Samples run epoch-major, then channel-major, then time: each epoch is a
//! row-major C×T block. Values are stored as f32; writing casts from f64, so
//! a write→read round trip is value-exact only for f32-representable samples
//! (the synthetic generator quantizes accordingly).

use std::path::Path;

use nalgebra::DMatrix;

use crate::{Error, Result};

use super::{Dataset, Epoch};

const MAGIC: &[u8; 4] = b"EPO1";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

/// Reads an EPO1 file into a [`Dataset`], preserving epoch order.
pub fn read_epo(path: impl AsRef<Path>) -> Result<Dataset> {
    decode(&std::fs::read(path)?)
}

/// Writes a [`Dataset`] as an EPO1 file. Byte output is deterministic.
pub fn write_epo(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, encode(dataset))?)
}

fn decode(bytes: &[u8]) -> Result<Dataset> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = read_u32(bytes, 4);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let n = read_u32(bytes, 8) as usize;
    let c = read_u32(bytes, 12) as usize;
    let t = read_u32(bytes, 16) as usize;
    let fs = f32::from_le_bytes(bytes[20..24].try_into().unwrap()) as f64;
    if !fs.is_finite() || fs <= 0.0 {
        return Err(Error::BadSampleRate(fs));
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }

    let payload = (n as u64)
        .checked_mul(c as u64)
        .and_then(|v| v.checked_mul(t as u64))
        .and_then(|v| v.checked_mul(4))
        .and_then(|v| v.checked_add(HEADER_LEN as u64 + n as u64))
        .filter(|&v| v <= usize::MAX as u64)
        .ok_or(Error::Truncated {
            expected: usize::MAX,
            found: bytes.len(),
        })? as usize;
    if bytes.len() < payload {
        return Err(Error::Truncated {
            expected: payload,
            found: bytes.len(),
        });
    }
    if bytes.len() > payload {
        return Err(Error::TrailingBytes);
    }

    let labels = &bytes[HEADER_LEN..HEADER_LEN + n];
    if let Some(&bad) = labels.iter().find(|&&b| b > 1) {
        return Err(Error::BadLabel(bad));
    }

    let mut epochs = Vec::with_capacity(n);
    let mut pos = HEADER_LEN + n;
    for (i, &label) in labels.iter().enumerate() {
        let mut flat = Vec::with_capacity(c * t);
        for _ in 0..c * t {
            let v = f32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap());
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { epoch: i });
            }
            flat.push(v as f64);
            pos += 4;
        }
        epochs.push(Epoch::new(DMatrix::from_row_slice(c, t, &flat), label)?);
    }
    Dataset::new(epochs, fs)
}

fn encode(dataset: &Dataset) -> Vec<u8> {
    let n = dataset.len();
    let c = dataset.channel_count();
    let t = dataset.sample_count();
    let mut out = Vec::with_capacity(HEADER_LEN + n + 4 * n * c * t);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(c as u32).to_le_bytes());
    out.extend_from_slice(&(t as u32).to_le_bytes());
    out.extend_from_slice(&(dataset.sample_rate_hz() as f32).to_le_bytes());
    for e in dataset.epochs() {
        out.push(e.label());
    }
    for e in dataset.epochs() {
        for i in 0..c {
            for j in 0..t {
                out.extend_from_slice(&(e.samples()[(i, j)] as f32).to_le_bytes());
            }
        }
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}
