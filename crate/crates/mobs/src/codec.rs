//! Serialization: the MOBS1 binary matrix codec, the permutation block,
//! and the JSON text envelopes the CLI reads and writes.
//!
//! MOBS1 layout:
//!
//! | bytes        | content                                        |
//! |--------------|------------------------------------------------|
//! | 0..4         | magic `MOBS`                                   |
//! | 4            | version, `0x01`                                |
//! | 5..7         | `n`, unsigned 16-bit big-endian                |
//! | 7..11        | `k`, unsigned 32-bit big-endian                |
//! | 11..         | `n*n` entries, row-major, `ceil(k/8)` bytes each |
//!
//! Within an entry, written bit position `j` (1-based) lives at byte
//! `(j-1)/8`, bit `(j-1) % 8`, least-significant bit first; trailing pad
//! bits are zero and decoding rejects anything else. This is the one
//! place the 1-based written positions meet the 0-based storage indices.
//!
//! The permutation block is `degree` as unsigned 32-bit big-endian
//! followed by the images as 1-based unsigned 32-bit big-endian values.
//!
//! Text envelopes are JSON with binary payloads in base64.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::matrix::BoolMatrix;
use crate::perm::Permutation;
use crate::protocol::{ParamSpec, ProtocolParams};

pub const MAGIC: &[u8; 4] = b"MOBS";
pub const VERSION: u8 = 0x01;
const HEADER_LEN: usize = 11;

/// Canonical binary encoding of a matrix.
pub fn encode_matrix(m: &BoolMatrix) -> Vec<u8> {
    assert!(m.n() <= u16::MAX as usize, "n exceeds the 16-bit header field");
    assert!(m.k() <= u32::MAX as usize, "k exceeds the 32-bit header field");
    let entry_bytes = m.k().div_ceil(8);
    let mut out = Vec::with_capacity(HEADER_LEN + m.n() * m.n() * entry_bytes);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(m.n() as u16).to_be_bytes());
    out.extend_from_slice(&(m.k() as u32).to_be_bytes());
    for entry in m.entries() {
        push_entry(&mut out, entry, entry_bytes);
    }
    out
}

fn push_entry(out: &mut Vec<u8>, entry: &BitString, entry_bytes: usize) {
    // words are little-endian by bit index, so their LE bytes are already
    // the LSB-first layout the format wants
    let mut written = 0;
    for word in entry.words() {
        let bytes = word.to_le_bytes();
        let take = bytes.len().min(entry_bytes - written);
        out.extend_from_slice(&bytes[..take]);
        written += take;
        if written == entry_bytes {
            break;
        }
    }
    debug_assert_eq!(written, entry_bytes);
}

pub fn decode_matrix(bytes: &[u8]) -> Result<BoolMatrix> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::codec(
            bytes.len(),
            format!("truncated header, need {HEADER_LEN} bytes"),
        ));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::codec(0, "bad magic, expected MOBS"));
    }
    if bytes[4] != VERSION {
        return Err(Error::codec(
            4,
            format!("unsupported version {:#04x}", bytes[4]),
        ));
    }
    let n = u16::from_be_bytes([bytes[5], bytes[6]]) as usize;
    let k = u32::from_be_bytes([bytes[7], bytes[8], bytes[9], bytes[10]]) as usize;
    if n == 0 {
        return Err(Error::codec(5, "n must be positive"));
    }
    if k == 0 {
        return Err(Error::codec(7, "k must be positive"));
    }
    let entry_bytes = k.div_ceil(8);
    let expected = HEADER_LEN + n * n * entry_bytes;
    if bytes.len() != expected {
        return Err(Error::codec(
            bytes.len().min(expected),
            format!("expected {expected} bytes total, got {}", bytes.len()),
        ));
    }
    let mut entries = Vec::with_capacity(n * n);
    for idx in 0..n * n {
        let start = HEADER_LEN + idx * entry_bytes;
        entries.push(decode_entry(&bytes[start..start + entry_bytes], k, start)?);
    }
    BoolMatrix::from_entries(n, entries)
}

fn decode_entry(raw: &[u8], k: usize, offset: usize) -> Result<BitString> {
    let mut words = vec![0u64; k.div_ceil(64)];
    for (i, &byte) in raw.iter().enumerate() {
        words[i / 8] |= (byte as u64) << (8 * (i % 8));
    }
    // pad bits beyond position k must be zero
    if !k.is_multiple_of(8) {
        let last = raw[raw.len() - 1];
        if last >> (k % 8) != 0 {
            return Err(Error::codec(
                offset + raw.len() - 1,
                format!("nonzero pad bits above position {k}"),
            ));
        }
    }
    Ok(BitString::from_words(k, words))
}

/// Binary permutation block: degree, then 1-based images, all u32 BE.
pub fn encode_permutation(p: &Permutation) -> Vec<u8> {
    assert!(p.degree() <= u32::MAX as usize);
    let mut out = Vec::with_capacity(4 + 4 * p.degree());
    out.extend_from_slice(&(p.degree() as u32).to_be_bytes());
    for &img in p.images() {
        out.extend_from_slice(&((img + 1) as u32).to_be_bytes());
    }
    out
}

pub fn decode_permutation(bytes: &[u8]) -> Result<Permutation> {
    if bytes.len() < 4 {
        return Err(Error::codec(bytes.len(), "truncated permutation block"));
    }
    let degree = u32::from_be_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let expected = 4 + 4 * degree;
    if bytes.len() != expected {
        return Err(Error::codec(
            bytes.len().min(expected),
            format!("expected {expected} bytes for degree {degree}, got {}", bytes.len()),
        ));
    }
    let mut one_based = Vec::with_capacity(degree);
    for i in 0..degree {
        let off = 4 + 4 * i;
        let img = u32::from_be_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
        if img == 0 || img > degree {
            return Err(Error::codec(
                off,
                format!("image {img} outside 1..={degree}"),
            ));
        }
        one_based.push(img);
    }
    Permutation::from_one_based(&one_based)
        .map_err(|e| Error::codec(4, format!("invalid permutation: {e}")))
}

/// JSON wrapper for a single matrix.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct MatrixEnvelope {
    pub n: u16,
    pub k: u32,
    /// base64 of the MOBS1 bytes
    pub payload: String,
}

impl MatrixEnvelope {
    pub fn from_matrix(m: &BoolMatrix) -> Self {
        MatrixEnvelope {
            n: m.n() as u16,
            k: m.k() as u32,
            payload: BASE64.encode(encode_matrix(m)),
        }
    }

    pub fn to_matrix(&self) -> Result<BoolMatrix> {
        let bytes = decode_base64(&self.payload)?;
        let m = decode_matrix(&bytes)?;
        if m.n() != self.n as usize || m.k() != self.k as usize {
            return Err(Error::codec(
                5,
                format!(
                    "envelope says n={}, k={} but payload holds n={}, k={}",
                    self.n,
                    self.k,
                    m.n(),
                    m.k()
                ),
            ));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text)
    }
}

/// JSON wrapper for the shared-key file: the key matrix plus its digest.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct SharedKeyEnvelope {
    #[serde(flatten)]
    pub matrix: MatrixEnvelope,
    pub sha256: String,
}

impl SharedKeyEnvelope {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text)
    }
}

/// The parameter file: sizes plus the public matrix and permutation.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ParamsEnvelope {
    pub n: u16,
    pub k: u32,
    pub p: f64,
    pub exponent_bits: u32,
    /// base64 MOBS1 matrix
    pub matrix: String,
    /// base64 permutation block
    pub permutation: String,
}

impl ParamsEnvelope {
    pub fn from_params(params: &ProtocolParams) -> Self {
        ParamsEnvelope {
            n: params.spec.n as u16,
            k: params.spec.k as u32,
            p: params.spec.p,
            exponent_bits: params.spec.exponent_bits as u32,
            matrix: BASE64.encode(encode_matrix(params.matrix())),
            permutation: BASE64.encode(encode_permutation(params.perm())),
        }
    }

    pub fn to_params(&self) -> Result<ProtocolParams> {
        let matrix = decode_matrix(&decode_base64(&self.matrix)?)?;
        let perm = decode_permutation(&decode_base64(&self.permutation)?)?;
        let spec = ParamSpec {
            n: self.n as usize,
            k: self.k as usize,
            p: self.p,
            exponent_bits: self.exponent_bits as usize,
        };
        ProtocolParams::from_parts(spec, matrix, perm)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text)
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        // serde_json reports line/column; translate the column to a byte
        // offset within that line for the error contract
        let offset = text
            .lines()
            .take(e.line().saturating_sub(1))
            .map(|l| l.len() + 1)
            .sum::<usize>()
            + e.column().saturating_sub(1);
        Error::codec(offset, format!("invalid JSON envelope: {e}"))
    })
}

fn decode_base64(text: &str) -> Result<Vec<u8>> {
    BASE64
        .decode(text.trim())
        .map_err(|e| Error::codec(0, format!("invalid base64 payload: {e}")))
}
