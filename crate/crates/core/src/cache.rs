//! Line-oriented text format for sparse matrices and an on-disk cache of
//! assembled differentials.
//!
//! ```text
//! rows cols field        field is QQ or a prime
//! row col num[/den]      1-based, one line per nonzero entry
//! 0 0 0                  terminator
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ce::{SectorBasis, MONOMIAL_ORDER_VERSION};
use crate::linalg::{Field, LinalgError, SparseExactMatrix};

/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "HAMCOH_CACHE_DIR";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> CacheError {
    CacheError::Parse { line, message: message.into() }
}

/// Serializes a matrix; entries come out in row-major order.
pub fn write_matrix(m: &SparseExactMatrix) -> String {
    let mut out = format!("{} {} {}\n", m.rows(), m.cols(), m.field());
    match m.residue_entries() {
        Some(entries) => {
            for (r, c, v) in entries {
                let _ = writeln!(out, "{} {} {}", r + 1, c + 1, v);
            }
        }
        None => {
            for (r, c, v) in m.rational_entries().expect("rational matrix") {
                if v.is_integer() {
                    let _ = writeln!(out, "{} {} {}", r + 1, c + 1, v.numer());
                } else {
                    let _ = writeln!(out, "{} {} {}/{}", r + 1, c + 1, v.numer(), v.denom());
                }
            }
        }
    }
    out.push_str("0 0 0\n");
    out
}

/// Parses the text format, reporting the first offending line.
pub fn read_matrix(text: &str) -> Result<SparseExactMatrix, CacheError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let [rows, cols, field] = parts[..] else {
        return Err(parse_err(1, "header must be `rows cols field`"));
    };
    let rows: usize = rows.parse().map_err(|_| parse_err(1, format!("bad row count {rows:?}")))?;
    let cols: usize = cols.parse().map_err(|_| parse_err(1, format!("bad column count {cols:?}")))?;
    let field = match field {
        "QQ" => Field::Rational,
        p => Field::Prime(p.parse().map_err(|_| parse_err(1, format!("bad field {p:?}")))?),
    };
    let mut rational = Vec::new();
    let mut residues = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut terminated = false;
    for (no, line) in lines.by_ref() {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [r, c, v] = parts[..] else {
            return Err(parse_err(no, "entry must be `row col value`"));
        };
        if (r, c, v) == ("0", "0", "0") {
            terminated = true;
            break;
        }
        let r: usize = r.parse().map_err(|_| parse_err(no, format!("bad row {r:?}")))?;
        let c: usize = c.parse().map_err(|_| parse_err(no, format!("bad column {c:?}")))?;
        if r == 0 || c == 0 || r > rows || c > cols {
            return Err(parse_err(no, format!("index ({r}, {c}) outside {rows}x{cols}")));
        }
        if !seen.insert((r, c)) {
            return Err(parse_err(no, format!("duplicate entry ({r}, {c})")));
        }
        match field {
            Field::Rational => {
                let value = parse_rational(v).ok_or_else(|| parse_err(no, format!("bad value {v:?}")))?;
                if value == BigRational::from_integer(0.into()) {
                    return Err(parse_err(no, "explicit zero entry"));
                }
                rational.push((r - 1, c - 1, value));
            }
            Field::Prime(p) => {
                let value: u64 = v.parse().map_err(|_| parse_err(no, format!("bad residue {v:?}")))?;
                if value == 0 || value >= p {
                    return Err(parse_err(no, format!("residue {value} not in 1..{p}")));
                }
                residues.push((r - 1, c - 1, value));
            }
        }
    }
    if !terminated {
        return Err(parse_err(text.lines().count() + 1, "missing `0 0 0` terminator"));
    }
    if let Some((no, _)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(parse_err(no, "content after terminator"));
    }
    let m = match field {
        Field::Rational => SparseExactMatrix::from_rational_triplets(rows, cols, rational),
        Field::Prime(p) => SparseExactMatrix::from_residue_triplets(rows, cols, p, residues),
    };
    m.map_err(|e: LinalgError| parse_err(1, e.to_string()))
}

fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        None => BigInt::from_str(s).ok().map(BigRational::from_integer),
        Some((n, d)) => {
            let n = BigInt::from_str(n).ok()?;
            let d = BigInt::from_str(d).ok()?;
            (d != BigInt::from(0)).then(|| BigRational::new(n, d))
        }
    }
}

/// Identity of a cached matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixKey {
    pub n: usize,
    pub scope: String,
    pub degree: usize,
    pub weight: i64,
    pub charge: Option<Vec<i32>>,
}

impl MatrixKey {
    /// Key of the differential leaving `from`.
    pub fn differential(from: &SectorBasis) -> Self {
        MatrixKey {
            n: from.spec().n(),
            scope: from.scope().name().to_string(),
            degree: from.degree(),
            weight: from.weight(),
            charge: from.charge().map(<[i32]>::to_vec),
        }
    }

    pub fn file_stem(&self) -> String {
        let mut s = format!("d-n{}-{}-deg{}-w{}", self.n, self.scope, self.degree, self.weight);
        if let Some(c) = &self.charge {
            let parts: Vec<String> = c.iter().map(i32::to_string).collect();
            s.push_str("-c");
            s.push_str(&parts.join("_"));
        }
        s
    }

    /// Digest of the key fields and the monomial order version.
    pub fn digest(&self) -> String {
        let text = format!(
            "order={} n={} scope={} degree={} weight={} charge={:?}",
            MONOMIAL_ORDER_VERSION, self.n, self.scope, self.degree, self.weight, self.charge
        );
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// Directory of cached matrices, each with a sidecar recording its key
/// digest and content digest; anything that fails either check is
/// treated as a miss.
#[derive(Clone, Debug)]
pub struct MatrixCache {
    dir: PathBuf,
}

impl MatrixCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, CacheError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| CacheError::Io { path: dir.clone(), source })?;
        Ok(MatrixCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn paths(&self, key: &MatrixKey) -> (PathBuf, PathBuf) {
        let stem = key.file_stem();
        (self.dir.join(format!("{stem}.mat")), self.dir.join(format!("{stem}.meta")))
    }

    pub fn store(&self, key: &MatrixKey, m: &SparseExactMatrix) -> Result<(), CacheError> {
        let (mat, meta) = self.paths(key);
        let text = write_matrix(m);
        let content = hex::encode(Sha256::digest(text.as_bytes()));
        fs::write(&mat, &text).map_err(|source| CacheError::Io { path: mat.clone(), source })?;
        fs::write(&meta, format!("key {}\ncontent {}\n", key.digest(), content))
            .map_err(|source| CacheError::Io { path: meta.clone(), source })
    }

    /// The cached matrix, or `None` if absent or stale.
    pub fn load(&self, key: &MatrixKey) -> Result<Option<SparseExactMatrix>, CacheError> {
        match self.check(key)? {
            CacheStatus::Valid => {}
            status => {
                if status != CacheStatus::Missing {
                    log::warn!("ignoring {:?} cache entry {}", status, key.file_stem());
                }
                return Ok(None);
            }
        }
        let (mat, _) = self.paths(key);
        let text = fs::read_to_string(&mat).map_err(|source| CacheError::Io { path: mat.clone(), source })?;
        match read_matrix(&text) {
            Ok(m) => Ok(Some(m)),
            Err(e) => {
                log::warn!("ignoring unreadable cache entry {}: {e}", mat.display());
                Ok(None)
            }
        }
    }

    pub fn check(&self, key: &MatrixKey) -> Result<CacheStatus, CacheError> {
        let (mat, meta) = self.paths(key);
        let Ok(meta_text) = fs::read_to_string(&meta) else {
            return Ok(CacheStatus::Missing);
        };
        let Ok(bytes) = fs::read(&mat) else {
            return Ok(CacheStatus::Missing);
        };
        let mut key_digest = None;
        let mut content_digest = None;
        for line in meta_text.lines() {
            match line.split_once(' ') {
                Some(("key", v)) => key_digest = Some(v.trim().to_string()),
                Some(("content", v)) => content_digest = Some(v.trim().to_string()),
                _ => {}
            }
        }
        if key_digest.as_deref() != Some(key.digest().as_str()) {
            return Ok(CacheStatus::StaleKey);
        }
        if content_digest.as_deref() != Some(hex::encode(Sha256::digest(&bytes)).as_str()) {
            return Ok(CacheStatus::Corrupt);
        }
        Ok(CacheStatus::Valid)
    }

    /// Every `.mat` entry with its validity, sorted by file name.
    pub fn entries(&self) -> Result<Vec<(String, bool)>, CacheError> {
        let mut out = Vec::new();
        let read = fs::read_dir(&self.dir).map_err(|source| CacheError::Io { path: self.dir.clone(), source })?;
        for entry in read {
            let entry = entry.map_err(|source| CacheError::Io { path: self.dir.clone(), source })?;
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("mat") {
                continue;
            }
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let valid = self.entry_is_consistent(&path);
            out.push((stem, valid));
        }
        out.sort();
        Ok(out)
    }

    fn entry_is_consistent(&self, mat: &Path) -> bool {
        let meta = mat.with_extension("meta");
        let (Ok(bytes), Ok(meta_text)) = (fs::read(mat), fs::read_to_string(meta)) else {
            return false;
        };
        let digest = hex::encode(Sha256::digest(&bytes));
        let content_ok = meta_text.lines().any(|l| l == format!("content {digest}"));
        content_ok && std::str::from_utf8(&bytes).ok().is_some_and(|t| read_matrix(t).is_ok())
    }

    /// Removes every cache file; returns how many were deleted.
    pub fn clear(&self) -> Result<usize, CacheError> {
        let mut removed = 0;
        let read = fs::read_dir(&self.dir).map_err(|source| CacheError::Io { path: self.dir.clone(), source })?;
        for entry in read {
            let entry = entry.map_err(|source| CacheError::Io { path: self.dir.clone(), source })?;
            let path = entry.path();
            if matches!(path.extension().and_then(|e| e.to_str()), Some("mat" | "meta")) {
                fs::remove_file(&path).map_err(|source| CacheError::Io { path: path.clone(), source })?;
                removed += 1;
            }
        }
        Ok(removed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Missing,
    StaleKey,
    Corrupt,
    Valid,
}
