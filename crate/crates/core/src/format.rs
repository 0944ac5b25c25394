//! On-disk formats: code-spec files, node blobs, help frames and the
//! byte/symbol packing used to store arbitrary files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::code::{derive_params, CodeError, Flavor, MsrCode, StarFamily};
use crate::field::{FieldKind, FieldSpec, Symbol};
use crate::transforms::ShortenedCode;

pub const SPEC_FORMAT: &str = "atrahasis-code-spec";
pub const SPEC_VERSION: u32 = 1;
pub const BLOB_MAGIC: &[u8; 4] = b"ATRA";
pub const FRAME_MAGIC: &[u8; 4] = b"ATRH";
pub const BLOB_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed code spec: {0}")]
    Spec(String),
    #[error("bad magic {found:?}, expected {expected:?}")]
    Magic { found: [u8; 4], expected: [u8; 4] },
    #[error("unsupported version {0}")]
    Version(u32),
    #[error("params hash {found:#018x} does not match {expected:#018x}")]
    ParamsHash { expected: u64, found: u64 },
    #[error("truncated data: {0}")]
    Truncated(String),
    #[error(transparent)]
    Code(#[from] CodeError),
}

impl FormatError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        FormatError::Io { path: path.display().to_string(), source }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SpecFile {
    format: String,
    version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    content_hash: Option<String>,
    field: FieldSection,
    params: ParamsSection,
    stars: StarsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shorten: Option<ShortenSection>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldSection {
    kind: FieldKind,
    m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reduction_poly: Option<String>,
    p: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct ParamsSection {
    n: usize,
    k: usize,
    d: usize,
    t: usize,
    flavor: Flavor,
}

#[derive(Debug, Serialize, Deserialize)]
struct StarsSection {
    x: Vec<Vec<String>>,
    second: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ShortenSection {
    delta: usize,
    pinned: Vec<usize>,
}

/// A star family, optionally shortened by pinning nodes to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSpec {
    pub stars: StarFamily,
    /// Base indices of pinned nodes; empty for an unshortened code.
    pub pinned: Vec<usize>,
}

/// A parsed spec plus whether its recorded hash matched the content.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub spec: CodeSpec,
    pub recorded_hash: Option<String>,
    pub hash_matches: bool,
}

fn hex_symbol(v: Symbol) -> String {
    format!("{v:#x}")
}

fn parse_symbol(s: &str) -> Result<Symbol, FormatError> {
    let digits = s.trim().trim_start_matches("0x").trim_start_matches("0X");
    let digits = if digits.is_empty() { "0" } else { digits };
    Symbol::from_str_radix(digits, 16).map_err(|_| FormatError::Spec(format!("bad hex element {s:?}")))
}

fn parse_vectors(rows: &[Vec<String>]) -> Result<Vec<Vec<Symbol>>, FormatError> {
    rows.iter().map(|r| r.iter().map(|s| parse_symbol(s)).collect()).collect()
}

impl CodeSpec {
    pub fn new(stars: StarFamily) -> Self {
        CodeSpec { stars, pinned: Vec::new() }
    }

    pub fn field(&self) -> &FieldSpec {
        self.stars.field()
    }

    /// Canonical text the content hash is computed over.
    fn canonical(&self) -> String {
        let f = self.field();
        let p = self.stars.params();
        let join = |rows: &[Vec<Symbol>]| rows.iter().map(|r| r.iter().map(|&v| hex_symbol(v)).collect::<Vec<_>>().join(",")).collect::<Vec<_>>().join(";");
        let mut s = format!(
            "{SPEC_FORMAT}/{SPEC_VERSION}\nfield {:?} {} {:#x} {}\nparams {} {} {} {} {}\nx {}\nsecond {}\n",
            f.kind(),
            f.degree(),
            f.reduction_poly(),
            f.characteristic(),
            p.n,
            p.k,
            p.d,
            p.t,
            p.flavor,
            join(self.stars.x_stars()),
            join(self.stars.second_stars()),
        );
        if let Some(points) = self.stars.points() {
            s.push_str(&format!("points {}\n", points.iter().map(|&v| hex_symbol(v)).collect::<Vec<_>>().join(",")));
        }
        if !self.pinned.is_empty() {
            s.push_str(&format!("pinned {:?}\n", self.pinned));
        }
        s
    }

    pub fn content_hash(&self) -> [u8; 32] {
        Sha256::digest(self.canonical().as_bytes()).into()
    }

    /// First eight bytes of the content hash, little-endian.
    pub fn params_hash(&self) -> u64 {
        let h = self.content_hash();
        u64::from_le_bytes(h[..8].try_into().expect("eight bytes"))
    }

    pub fn to_toml(&self) -> String {
        let f = self.field();
        let p = self.stars.params();
        let hexes = |rows: &[Vec<Symbol>]| rows.iter().map(|r| r.iter().map(|&v| hex_symbol(v)).collect()).collect();
        let file = SpecFile {
            format: SPEC_FORMAT.into(),
            version: SPEC_VERSION,
            content_hash: Some(hex::encode(self.content_hash())),
            field: FieldSection {
                kind: f.kind(),
                m: f.degree(),
                reduction_poly: (f.kind() == FieldKind::Binary).then(|| format!("{:#x}", f.reduction_poly())),
                p: f.characteristic(),
            },
            params: ParamsSection { n: p.n, k: p.k, d: p.d, t: p.t, flavor: p.flavor },
            stars: StarsSection {
                x: hexes(self.stars.x_stars()),
                second: hexes(self.stars.second_stars()),
                points: self.stars.points().map(|v| v.iter().map(|&a| hex_symbol(a)).collect()),
            },
            shorten: (!self.pinned.is_empty()).then(|| ShortenSection { delta: self.pinned.len(), pinned: self.pinned.clone() }),
        };
        toml::to_string(&file).expect("spec serializes")
    }

    pub fn parse(text: &str) -> Result<LoadedSpec, FormatError> {
        let file: SpecFile = toml::from_str(text).map_err(|e| FormatError::Spec(e.to_string()))?;
        if file.format != SPEC_FORMAT {
            return Err(FormatError::Spec(format!("format is {:?}, expected {SPEC_FORMAT:?}", file.format)));
        }
        if file.version != SPEC_VERSION {
            return Err(FormatError::Version(file.version));
        }
        let field = match file.field.kind {
            FieldKind::Binary => {
                let poly = file.field.reduction_poly.as_deref().ok_or_else(|| FormatError::Spec("binary field needs reduction_poly".into()))?;
                FieldSpec::binary_with_poly(file.field.m, parse_symbol(poly)?).map_err(CodeError::from)?
            }
            FieldKind::Prime => FieldSpec::prime(file.field.p).map_err(CodeError::from)?,
        };
        let ps = &file.params;
        let params = derive_params(ps.n, ps.k, ps.d, ps.flavor)?;
        if params.t != ps.t {
            return Err(FormatError::Spec(format!("t = {} does not match d/(d-k+1) = {}", ps.t, params.t)));
        }
        let points = file.stars.points.as_ref().map(|v| v.iter().map(|s| parse_symbol(s)).collect::<Result<Vec<_>, _>>()).transpose()?;
        let stars = StarFamily::new(&field, params, parse_vectors(&file.stars.x)?, parse_vectors(&file.stars.second)?)?.with_points(points);
        let pinned = match file.shorten {
            Some(s) => {
                if s.delta != s.pinned.len() {
                    return Err(FormatError::Spec(format!("shorten delta {} disagrees with {} pinned nodes", s.delta, s.pinned.len())));
                }
                s.pinned
            }
            None => Vec::new(),
        };
        let spec = CodeSpec { stars, pinned };
        let hash_matches = file.content_hash.as_deref().is_some_and(|h| h.eq_ignore_ascii_case(&hex::encode(spec.content_hash())));
        Ok(LoadedSpec { spec, recorded_hash: file.content_hash, hash_matches })
    }

    pub fn read(path: &Path) -> Result<LoadedSpec, FormatError> {
        let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), FormatError> {
        write_atomic(path, self.to_toml().as_bytes())
    }

    pub fn base_code(&self) -> Result<MsrCode, CodeError> {
        MsrCode::new(self.stars.clone())
    }

    /// The code clients see: shortened when nodes are pinned.
    pub fn shortened(&self) -> Result<ShortenedCode, CodeError> {
        ShortenedCode::with_pinned(&self.base_code()?, self.pinned.clone())
    }
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    fs::write(tmp, bytes).map_err(|e| FormatError::io(tmp, e))?;
    fs::rename(tmp, path).map_err(|e| FormatError::io(path, e))
}

/// Little-endian `ceil(m/8)` bytes per element for binary fields,
/// minimal-width big-endian for prime fields.
pub fn encode_elements(field: &FieldSpec, values: &[Symbol], out: &mut Vec<u8>) {
    let w = field.element_bytes();
    for &v in values {
        let bytes = v.to_le_bytes();
        match field.kind() {
            FieldKind::Binary => out.extend_from_slice(&bytes[..w]),
            FieldKind::Prime => out.extend(bytes[..w].iter().rev()),
        }
    }
}

pub fn decode_elements(field: &FieldSpec, bytes: &[u8]) -> Result<Vec<Symbol>, FormatError> {
    let w = field.element_bytes();
    if bytes.len() % w != 0 {
        return Err(FormatError::Truncated(format!("{} bytes is not a whole number of {w}-byte elements", bytes.len())));
    }
    bytes
        .chunks_exact(w)
        .map(|c| {
            let mut le = [0u8; 4];
            match field.kind() {
                FieldKind::Binary => le[..w].copy_from_slice(c),
                FieldKind::Prime => c.iter().rev().enumerate().for_each(|(i, &b)| le[i] = b),
            }
            let v = u32::from_le_bytes(le);
            if field.contains(v) {
                Ok(v)
            } else {
                Err(FormatError::Code(CodeError::Field(crate::field::FieldError::OutOfRange { value: v as u64, field: field.to_string() })))
            }
        })
        .collect()
}

/// 16-byte header: magic, version, index, params hash (all little-endian).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlobHeader {
    pub version: u16,
    pub node: u16,
    pub params_hash: u64,
}

fn write_header(magic: &[u8; 4], a: u16, b: u16, hash: u64, out: &mut Vec<u8>) {
    out.extend_from_slice(magic);
    out.extend_from_slice(&a.to_le_bytes());
    out.extend_from_slice(&b.to_le_bytes());
    out.extend_from_slice(&hash.to_le_bytes());
}

fn read_header<'a>(magic: &[u8; 4], bytes: &'a [u8], expected_hash: u64) -> Result<(u16, u16, &'a [u8]), FormatError> {
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::Truncated(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let found: [u8; 4] = bytes[..4].try_into().expect("four bytes");
    if &found != magic {
        return Err(FormatError::Magic { found, expected: *magic });
    }
    let a = u16::from_le_bytes([bytes[4], bytes[5]]);
    let b = u16::from_le_bytes([bytes[6], bytes[7]]);
    let hash = u64::from_le_bytes(bytes[8..16].try_into().expect("eight bytes"));
    if hash != expected_hash {
        return Err(FormatError::ParamsHash { expected: expected_hash, found: hash });
    }
    Ok((a, b, &bytes[HEADER_LEN..]))
}

/// A node blob: header followed by the node's symbols for one or more chunks.
pub fn encode_blob(field: &FieldSpec, node: usize, params_hash: u64, values: &[Symbol]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + values.len() * field.element_bytes());
    write_header(BLOB_MAGIC, BLOB_VERSION, node as u16, params_hash, &mut out);
    encode_elements(field, values, &mut out);
    out
}

pub fn decode_blob(field: &FieldSpec, bytes: &[u8], params_hash: u64) -> Result<(BlobHeader, Vec<Symbol>), FormatError> {
    let (version, node, body) = read_header(BLOB_MAGIC, bytes, params_hash)?;
    if version != BLOB_VERSION {
        return Err(FormatError::Version(version as u32));
    }
    Ok((BlobHeader { version, node, params_hash }, decode_elements(field, body)?))
}

pub fn encode_help_frame(field: &FieldSpec, helper: usize, failed: usize, params_hash: u64, values: &[Symbol]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + values.len() * field.element_bytes());
    write_header(FRAME_MAGIC, helper as u16, failed as u16, params_hash, &mut out);
    encode_elements(field, values, &mut out);
    out
}

/// Returns `(helper, failed, values)`.
pub fn decode_help_frame(field: &FieldSpec, bytes: &[u8], params_hash: u64) -> Result<(usize, usize, Vec<Symbol>), FormatError> {
    let (helper, failed, body) = read_header(FRAME_MAGIC, bytes, params_hash)?;
    Ok((helper as usize, failed as usize, decode_elements(field, body)?))
}

/// Layout of a byte stream cut into chunks of `symbols_per_chunk` symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkedFile {
    pub original_length: u64,
    pub chunk_count: usize,
    /// Zero bits appended after the length prefix and payload.
    pub padding_bits: usize,
    pub symbols_per_chunk: usize,
}

/// Prefixes `data` with its length (u64 LE), packs the bits LSB-first into
/// symbols of `field.bits_per_symbol()` bits and zero-pads to whole chunks.
pub fn pack_bytes(field: &FieldSpec, data: &[u8], symbols_per_chunk: usize) -> (ChunkedFile, Vec<Symbol>) {
    let b = field.bits_per_symbol() as usize;
    let mut stream = Vec::with_capacity(8 + data.len());
    stream.extend_from_slice(&(data.len() as u64).to_le_bytes());
    stream.extend_from_slice(data);
    let bits = stream.len() * 8;
    let symbols = bits.div_ceil(b);
    let chunk_count = symbols.div_ceil(symbols_per_chunk).max(1);
    let total = chunk_count * symbols_per_chunk;
    let mut out = vec![0 as Symbol; total];
    let (mut acc, mut have, mut idx) = (0u64, 0usize, 0usize);
    let mask = (1u64 << b) - 1;
    for &byte in &stream {
        acc |= (byte as u64) << have;
        have += 8;
        while have >= b {
            out[idx] = (acc & mask) as Symbol;
            idx += 1;
            acc >>= b;
            have -= b;
        }
    }
    if have > 0 {
        out[idx] = (acc & mask) as Symbol;
    }
    let layout = ChunkedFile { original_length: data.len() as u64, chunk_count, padding_bits: total * b - bits, symbols_per_chunk };
    (layout, out)
}

pub fn unpack_bytes(field: &FieldSpec, symbols: &[Symbol]) -> Result<Vec<u8>, FormatError> {
    let b = field.bits_per_symbol() as usize;
    let mut bytes = Vec::with_capacity(symbols.len() * b / 8);
    let (mut acc, mut have) = (0u64, 0usize);
    for &s in symbols {
        if (s as u64) >> b != 0 {
            return Err(FormatError::Spec(format!("symbol {s:#x} carries more than {b} payload bits")));
        }
        acc |= (s as u64) << have;
        have += b;
        while have >= 8 {
            bytes.push(acc as u8);
            acc >>= 8;
            have -= 8;
        }
    }
    if bytes.len() < 8 {
        return Err(FormatError::Truncated("missing length prefix".into()));
    }
    let len = u64::from_le_bytes(bytes[..8].try_into().expect("eight bytes")) as usize;
    if bytes.len() < 8 + len {
        return Err(FormatError::Truncated(format!("length prefix says {len} bytes, only {} present", bytes.len() - 8)));
    }
    bytes.truncate(8 + len);
    bytes.drain(..8);
    Ok(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::fixture_956;

    #[test]
    fn element_widths() {
        let gf16 = FieldSpec::gf16();
        let mut out = Vec::new();
        encode_elements(&gf16, &[0xa, 0x3], &mut out);
        assert_eq!(out, vec![0x0a, 0x03]);
        let gf4096 = FieldSpec::binary(12).unwrap();
        out.clear();
        encode_elements(&gf4096, &[0xabc], &mut out);
        assert_eq!(out, vec![0xbc, 0x0a]);
        let gf257 = FieldSpec::prime(257).unwrap();
        out.clear();
        encode_elements(&gf257, &[256], &mut out);
        assert_eq!(out, vec![0x01, 0x00]);
        assert_eq!(decode_elements(&gf257, &out).unwrap(), vec![256]);
    }

    #[test]
    fn header_layout() {
        let blob = encode_blob(&FieldSpec::gf16(), 3, 0x1122334455667788, &[1, 2]);
        assert_eq!(&blob[..4], b"ATRA");
        assert_eq!(blob.len(), HEADER_LEN + 2);
        assert_eq!(blob[6], 3);
        assert_eq!(blob[8], 0x88);
    }

    #[test]
    fn fixture_spec_roundtrip() {
        let spec = CodeSpec::new(fixture_956());
        let loaded = CodeSpec::parse(&spec.to_toml()).unwrap();
        assert!(loaded.hash_matches);
        assert_eq!(loaded.spec, spec);
    }
}
