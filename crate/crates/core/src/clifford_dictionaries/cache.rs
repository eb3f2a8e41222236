//! Binary cache files for dictionaries.
//!
//! Layout (little-endian): `SXD1`, u8 version, u8 kind tag, u8 n, u64 column
//! count, 32-byte SHA-256 of the body, body. Diagonal kinds store per column
//! `n` bytes of `a` and `ceil(n(n-1)/2 / 8)` bytes of CZ bits (LSB first);
//! Clifford kinds store a u64 symplectic index and `ceil(2n / 8)` bytes of
//! phase bits.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{pair_count, ColumnId, DiagonalCliffordCode, Dictionary, DictionaryCaps, DictionaryKind};
use crate::binary_symplectic::CliffordId;
use crate::error::{Error, Result};
use crate::operator::DenseOperator;

const MAGIC: &[u8; 4] = b"SXD1";
const VERSION: u8 = 1;
const HEADER: usize = 4 + 1 + 1 + 1 + 8 + 32;

pub const CACHE_ENV: &str = "STABEX_CACHE_DIR";

/// Cache directory from `STABEX_CACHE_DIR`, falling back to `./stabex-cache`.
pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("stabex-cache"))
}

pub fn cache_path(dir: &Path, kind: DictionaryKind, n: usize) -> PathBuf {
    dir.join(format!("{}-n{n}.sxd", kind.name()))
}

fn record_len(kind: DictionaryKind, n: usize) -> usize {
    if kind.is_diagonal() {
        n + pair_count(n).div_ceil(8)
    } else {
        8 + (2 * n).div_ceil(8)
    }
}

pub(super) fn encode_body(d: &Dictionary) -> Result<Vec<u8>> {
    if d.kind == DictionaryKind::Custom {
        return Err(Error::Cache("custom dictionaries are not cached".into()));
    }
    let n = d.n;
    let mut body = Vec::with_capacity(d.ids.len() * record_len(d.kind, n));
    for id in &d.ids {
        match id {
            ColumnId::Diagonal(c) => {
                body.extend_from_slice(c.a());
                body.extend_from_slice(&c.b().to_le_bytes()[..pair_count(n).div_ceil(8)]);
            }
            ColumnId::Clifford(c) => {
                body.extend_from_slice(&c.symplectic_index.to_le_bytes());
                body.extend_from_slice(&c.phase_bits.to_le_bytes()[..(2 * n).div_ceil(8)]);
            }
            ColumnId::Reduced(_) => return Err(Error::Cache("reduced columns are not cached".into())),
        }
    }
    Ok(body)
}

pub fn save_dictionary(d: &Dictionary, path: &Path) -> Result<()> {
    let body = encode_body(d)?;
    let checksum: [u8; 32] = Sha256::digest(&body).into();
    let mut out = Vec::with_capacity(HEADER + body.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(d.kind.tag());
    out.push(d.n as u8);
    out.extend_from_slice(&(d.ids.len() as u64).to_le_bytes());
    out.extend_from_slice(&checksum);
    out.extend_from_slice(&body);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn load_dictionary(path: &Path) -> Result<Dictionary> {
    let bytes = fs::read(path)?;
    if bytes.len() < HEADER {
        return Err(Error::Cache("truncated header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::Cache(format!("unsupported format version {}", bytes[4])));
    }
    let kind = DictionaryKind::from_tag(bytes[5]).ok_or_else(|| Error::Cache(format!("unknown kind tag {}", bytes[5])))?;
    let n = bytes[6] as usize;
    let count = u64::from_le_bytes(bytes[7..15].try_into().expect("8 bytes")) as usize;
    let stored: [u8; 32] = bytes[15..47].try_into().expect("32 bytes");
    let rec = record_len(kind, n);
    let body = &bytes[HEADER..];
    if body.len() < count.saturating_mul(rec) {
        return Err(Error::Cache(format!("truncated body: {} of {} bytes", body.len(), count * rec)));
    }
    if body.len() > count * rec {
        return Err(Error::Cache("trailing bytes after body".into()));
    }
    let digest: [u8; 32] = Sha256::digest(body).into();
    if digest != stored {
        return Err(Error::Cache("checksum mismatch".into()));
    }
    let generator = format!("{}:n={n}", kind.name());
    if kind.is_diagonal() {
        let nb = pair_count(n).div_ceil(8);
        let mut codes = Vec::with_capacity(count);
        for r in body.chunks(rec) {
            let mut b = [0u8; 4];
            b[..nb].copy_from_slice(&r[n..n + nb]);
            codes.push(DiagonalCliffordCode::new(n, &r[..n], u32::from_le_bytes(b))?);
        }
        Dictionary::from_codes(kind, n, &codes, &generator)
    } else {
        let np = (2 * n).div_ceil(8);
        let mut items: Vec<(CliffordId, DenseOperator)> = Vec::with_capacity(count);
        for r in body.chunks(rec) {
            let idx = u64::from_le_bytes(r[..8].try_into().expect("8 bytes"));
            let mut p = [0u8; 4];
            p[..np].copy_from_slice(&r[8..8 + np]);
            let id = CliffordId { symplectic_index: idx, phase_bits: u32::from_le_bytes(p) };
            let mut u = id.unitary(n)?;
            if kind == DictionaryKind::Real {
                u = DenseOperator::from_entries(u.entries().iter().map(|z| num_complex::Complex64::new(z.re, 0.0)).collect())?;
            }
            items.push((id, u));
        }
        Dictionary::from_cliffords(kind, n, items)
    }
}

/// Loads the cached dictionary if present and valid, otherwise builds and saves it.
pub fn load_or_build(dir: &Path, kind: DictionaryKind, n: usize, caps: &DictionaryCaps) -> Result<Dictionary> {
    let path = cache_path(dir, kind, n);
    if path.exists() {
        if let Ok(d) = load_dictionary(&path) {
            if d.kind == kind && d.n == n {
                return Ok(d);
            }
        }
    }
    let d = super::build_dictionary_with_caps(kind, n, caps)?;
    save_dictionary(&d, &path)?;
    Ok(d)
}
