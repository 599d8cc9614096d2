use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::LinalgError;

/// Coefficient field of a [`SparseExactMatrix`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Rational,
    Prime(u64),
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "QQ"),
            Field::Prime(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Clone, Debug)]
enum Storage {
    // Rationals that happen to be word-sized integers; every assembled
    // differential lands here.
    Integer(Vec<(u32, u32, i64)>),
    Rational(Vec<(u32, u32, BigRational)>),
    Residue { modulus: u64, entries: Vec<(u32, u32, u32)> },
}

/// Coordinate-form sparse matrix over QQ or a word-sized prime field.
///
/// Entries are kept sorted row-major, unique per position, and never zero.
#[derive(Clone, Debug)]
pub struct SparseExactMatrix {
    rows: usize,
    cols: usize,
    storage: Storage,
}

fn check_index(rows: usize, cols: usize, r: usize, c: usize) -> Result<(), LinalgError> {
    if r >= rows || c >= cols {
        return Err(LinalgError::IndexOutOfRange { row: r, col: c, rows, cols });
    }
    if r > u32::MAX as usize || c > u32::MAX as usize {
        return Err(LinalgError::TooLarge);
    }
    Ok(())
}

fn sort_unique<T>(entries: &mut Vec<(u32, u32, T)>) -> Result<(), LinalgError> {
    entries.sort_by_key(|e| (e.0, e.1));
    for w in entries.windows(2) {
        if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
            return Err(LinalgError::DuplicateEntry {
                row: w[0].0 as usize,
                col: w[0].1 as usize,
            });
        }
    }
    Ok(())
}

pub(crate) fn reduce_i64(v: i64, p: u64) -> u32 {
    v.rem_euclid(p as i64) as u32
}

pub(crate) fn reduce_bigint(v: &BigInt, p: u64) -> u32 {
    v.mod_floor(&BigInt::from(p)).to_u32().expect("residue below 2^32")
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

impl SparseExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseExactMatrix { rows, cols, storage: Storage::Integer(Vec::new()) }
    }

    pub fn identity(k: usize) -> Self {
        let entries = (0..k).map(|i| (i, i, 1i64)).collect();
        Self::from_integer_triplets(k, k, entries).expect("valid identity")
    }

    /// Rational matrix from integer triplets; zero values are dropped.
    pub fn from_integer_triplets(
        rows: usize,
        cols: usize,
        entries: Vec<(usize, usize, i64)>,
    ) -> Result<Self, LinalgError> {
        let mut out = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            check_index(rows, cols, r, c)?;
            if v != 0 {
                out.push((r as u32, c as u32, v));
            }
        }
        sort_unique(&mut out)?;
        Ok(SparseExactMatrix { rows, cols, storage: Storage::Integer(out) })
    }

    pub fn from_rational_triplets(
        rows: usize,
        cols: usize,
        entries: Vec<(usize, usize, BigRational)>,
    ) -> Result<Self, LinalgError> {
        let mut out = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            check_index(rows, cols, r, c)?;
            if !v.is_zero() {
                out.push((r as u32, c as u32, v));
            }
        }
        sort_unique(&mut out)?;
        let small = out.iter().all(|e| e.2.is_integer() && e.2.numer().to_i64().is_some());
        let storage = if small {
            Storage::Integer(
                out.into_iter()
                    .map(|(r, c, v)| (r, c, v.numer().to_i64().unwrap()))
                    .collect(),
            )
        } else {
            Storage::Rational(out)
        };
        Ok(SparseExactMatrix { rows, cols, storage })
    }

    /// Matrix over `GF(modulus)`; values are reduced and zeros dropped.
    pub fn from_residue_triplets(
        rows: usize,
        cols: usize,
        modulus: u64,
        entries: Vec<(usize, usize, u64)>,
    ) -> Result<Self, LinalgError> {
        if !super::is_word_prime(modulus) {
            return Err(LinalgError::BadModulus(modulus));
        }
        let mut out = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            check_index(rows, cols, r, c)?;
            let v = (v % modulus) as u32;
            if v != 0 {
                out.push((r as u32, c as u32, v));
            }
        }
        sort_unique(&mut out)?;
        Ok(SparseExactMatrix { rows, cols, storage: Storage::Residue { modulus, entries: out } })
    }

    /// Dense integer rows, mostly for tests and small examples.
    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged dense matrix");
            for (j, &v) in row.iter().enumerate() {
                entries.push((i, j, v));
            }
        }
        Self::from_integer_triplets(r, c, entries).expect("dense input is valid")
    }

    /// Builds a rational matrix from column vectors of integer entries
    /// `(row, value)`; each column must list distinct rows.
    pub(crate) fn from_integer_columns(rows: usize, columns: &[Vec<(u32, i64)>]) -> Self {
        let mut entries: Vec<(u32, u32, i64)> = columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().filter(|e| e.1 != 0).map(move |&(r, v)| (r, c as u32, v)))
            .collect();
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        debug_assert!(entries.windows(2).all(|w| (w[0].0, w[0].1) != (w[1].0, w[1].1)));
        SparseExactMatrix { rows, cols: columns.len(), storage: Storage::Integer(entries) }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Integer(e) => e.len(),
            Storage::Rational(e) => e.len(),
            Storage::Residue { entries, .. } => entries.len(),
        }
    }

    pub fn field(&self) -> Field {
        match &self.storage {
            Storage::Residue { modulus, .. } => Field::Prime(*modulus),
            _ => Field::Rational,
        }
    }

    pub fn modulus(&self) -> Option<u64> {
        match self.field() {
            Field::Prime(p) => Some(p),
            Field::Rational => None,
        }
    }

    /// Rational entries in row-major order; `None` for residue matrices.
    pub fn rational_entries(&self) -> Option<Vec<(usize, usize, BigRational)>> {
        match &self.storage {
            Storage::Integer(e) => Some(
                e.iter()
                    .map(|&(r, c, v)| (r as usize, c as usize, BigRational::from_integer(v.into())))
                    .collect(),
            ),
            Storage::Rational(e) => Some(e.iter().map(|(r, c, v)| (*r as usize, *c as usize, v.clone())).collect()),
            Storage::Residue { .. } => None,
        }
    }

    /// Residue entries in row-major order; `None` for rational matrices.
    pub fn residue_entries(&self) -> Option<Vec<(usize, usize, u64)>> {
        match &self.storage {
            Storage::Residue { entries, .. } => {
                Some(entries.iter().map(|&(r, c, v)| (r as usize, c as usize, v as u64)).collect())
            }
            _ => None,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Option<BigRational> {
        let key = (row as u32, col as u32);
        match &self.storage {
            Storage::Integer(e) => e
                .binary_search_by_key(&key, |x| (x.0, x.1))
                .ok()
                .map(|i| BigRational::from_integer(e[i].2.into())),
            Storage::Rational(e) => e
                .binary_search_by_key(&key, |x| (x.0, x.1))
                .ok()
                .map(|i| e[i].2.clone()),
            Storage::Residue { entries, .. } => entries
                .binary_search_by_key(&key, |x| (x.0, x.1))
                .ok()
                .map(|i| BigRational::from_integer(entries[i].2.into())),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    /// Reduction modulo `p`. Fails if `p` divides a denominator or the
    /// matrix already lives over a different prime.
    pub fn reduce_mod(&self, p: u64) -> Result<SparseExactMatrix, LinalgError> {
        if !super::is_word_prime(p) {
            return Err(LinalgError::BadModulus(p));
        }
        let entries: Vec<(u32, u32, u32)> = match &self.storage {
            Storage::Integer(e) => e
                .iter()
                .map(|&(r, c, v)| (r, c, reduce_i64(v, p)))
                .filter(|e| e.2 != 0)
                .collect(),
            Storage::Rational(e) => {
                let mut out = Vec::with_capacity(e.len());
                for (r, c, v) in e {
                    let den = reduce_bigint(v.denom(), p);
                    if den == 0 {
                        return Err(LinalgError::UnreducibleEntry {
                            row: *r as usize,
                            col: *c as usize,
                            prime: p,
                        });
                    }
                    let num = reduce_bigint(v.numer(), p) as u64;
                    let val = (num * inv_mod(den as u64, p) % p) as u32;
                    if val != 0 {
                        out.push((*r, *c, val));
                    }
                }
                out
            }
            Storage::Residue { modulus, entries } => {
                if *modulus != p {
                    return Err(LinalgError::FieldMismatch { expected: p, found: *modulus });
                }
                entries.clone()
            }
        };
        Ok(SparseExactMatrix {
            rows: self.rows,
            cols: self.cols,
            storage: Storage::Residue { modulus: p, entries },
        })
    }

    pub(crate) fn residue_triplets(&self) -> Option<(u64, &[(u32, u32, u32)])> {
        match &self.storage {
            Storage::Residue { modulus, entries } => Some((*modulus, entries)),
            _ => None,
        }
    }

    /// Integer rows with each row scaled by the lcm of its denominators.
    /// Row scaling by nonzero constants preserves rank and kernel.
    pub(crate) fn integer_rows(&self) -> Result<Vec<Vec<(u32, BigInt)>>, LinalgError> {
        let mut rows: Vec<Vec<(u32, BigRational)>> = vec![Vec::new(); self.rows];
        match &self.storage {
            Storage::Residue { modulus, .. } => return Err(LinalgError::NotRational(*modulus)),
            Storage::Integer(e) => {
                return Ok({
                    let mut out: Vec<Vec<(u32, BigInt)>> = vec![Vec::new(); self.rows];
                    for &(r, c, v) in e {
                        out[r as usize].push((c, BigInt::from(v)));
                    }
                    out
                })
            }
            Storage::Rational(e) => {
                for (r, c, v) in e {
                    rows[*r as usize].push((*c, v.clone()));
                }
            }
        }
        Ok(rows
            .into_iter()
            .map(|row| {
                let lcm = row.iter().fold(BigInt::from(1), |acc, (_, v)| acc.lcm(v.denom()));
                row.into_iter()
                    .map(|(c, v)| (c, (v * BigRational::from_integer(lcm.clone())).to_integer()))
                    .collect()
            })
            .collect())
    }

    pub fn transpose(&self) -> SparseExactMatrix {
        fn flip<T: Clone>(e: &[(u32, u32, T)]) -> Vec<(u32, u32, T)> {
            let mut out: Vec<_> = e.iter().map(|(r, c, v)| (*c, *r, v.clone())).collect();
            out.sort_by_key(|x| (x.0, x.1));
            out
        }
        let storage = match &self.storage {
            Storage::Integer(e) => Storage::Integer(flip(e)),
            Storage::Rational(e) => Storage::Rational(flip(e)),
            Storage::Residue { modulus, entries } => Storage::Residue { modulus: *modulus, entries: flip(entries) },
        };
        SparseExactMatrix { rows: self.cols, cols: self.rows, storage }
    }

    /// Matrix-vector product over QQ.
    pub fn mul_vec(&self, v: &[BigRational]) -> Result<Vec<BigRational>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::ShapeMismatch { expected: self.cols, found: v.len() });
        }
        let entries = self.rational_entries().ok_or(LinalgError::NotRational(self.modulus().unwrap_or(0)))?;
        let mut out = vec![BigRational::zero(); self.rows];
        for (r, c, a) in entries {
            if !v[c].is_zero() {
                out[r] += a * &v[c];
            }
        }
        Ok(out)
    }

    /// Product `self · other` over QQ (small matrices).
    pub fn mul(&self, other: &SparseExactMatrix) -> Result<SparseExactMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::ShapeMismatch { expected: self.cols, found: other.rows });
        }
        let a = self.rational_entries().ok_or(LinalgError::NotRational(0))?;
        let b = other.rational_entries().ok_or(LinalgError::NotRational(0))?;
        let mut b_rows: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); other.rows];
        for (r, c, v) in b {
            b_rows[r].push((c, v));
        }
        let mut acc = std::collections::BTreeMap::<(usize, usize), BigRational>::new();
        for (r, k, v) in a {
            for (c, w) in &b_rows[k] {
                *acc.entry((r, *c)).or_insert_with(BigRational::zero) += &v * w;
            }
        }
        SparseExactMatrix::from_rational_triplets(
            self.rows,
            other.cols,
            acc.into_iter().map(|((r, c), v)| (r, c, v)).collect(),
        )
    }

    /// A copy with one extra rational column appended on the right.
    pub fn with_column(&self, v: &[BigRational]) -> Result<SparseExactMatrix, LinalgError> {
        if v.len() != self.rows {
            return Err(LinalgError::ShapeMismatch { expected: self.rows, found: v.len() });
        }
        let mut entries = self.rational_entries().ok_or(LinalgError::NotRational(0))?;
        entries.extend(v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(r, x)| (r, self.cols, x.clone())));
        SparseExactMatrix::from_rational_triplets(self.rows, self.cols + 1, entries)
    }

    /// Dense rational copy.
    pub fn to_dense(&self) -> Vec<Vec<BigRational>> {
        let mut out = vec![vec![BigRational::zero(); self.cols]; self.rows];
        match self.rational_entries() {
            Some(e) => {
                for (r, c, v) in e {
                    out[r][c] = v;
                }
            }
            None => {
                for (r, c, v) in self.residue_entries().unwrap() {
                    out[r][c] = BigRational::from_integer(v.into());
                }
            }
        }
        out
    }

    /// Largest absolute numerator, a rough size measure for logging.
    pub fn max_abs_entry(&self) -> BigInt {
        match self.rational_entries() {
            Some(e) => e.iter().map(|x| x.2.numer().abs()).max().unwrap_or_default(),
            None => self
                .residue_entries()
                .unwrap()
                .iter()
                .map(|x| BigInt::from(x.2))
                .max()
                .unwrap_or_default(),
        }
    }
}

impl PartialEq for SparseExactMatrix {
    fn eq(&self, other: &Self) -> bool {
        if self.rows != other.rows || self.cols != other.cols || self.field() != other.field() {
            return false;
        }
        match self.field() {
            Field::Rational => self.rational_entries() == other.rational_entries(),
            Field::Prime(_) => self.residue_entries() == other.residue_entries(),
        }
    }
}

impl Eq for SparseExactMatrix {}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn duplicates_are_rejected() {
        let err = SparseExactMatrix::from_integer_triplets(2, 2, vec![(0, 1, 1), (0, 1, 2)]).unwrap_err();
        assert_eq!(err, LinalgError::DuplicateEntry { row: 0, col: 1 });
    }

    #[test]
    fn zeros_are_dropped() {
        let m = SparseExactMatrix::from_integer_triplets(2, 2, vec![(0, 0, 0), (1, 1, 3)]).unwrap();
        assert_eq!(m.nnz(), 1);
        let m = SparseExactMatrix::from_residue_triplets(2, 2, 7, vec![(0, 0, 14), (1, 0, 3)]).unwrap();
        assert_eq!(m.residue_entries().unwrap(), vec![(1, 0, 3)]);
    }

    #[test]
    fn reduce_mod_handles_denominators() {
        let m = SparseExactMatrix::from_rational_triplets(1, 2, vec![(0, 0, q(1, 2)), (0, 1, q(3, 1))]).unwrap();
        let r = m.reduce_mod(7).unwrap();
        // 1/2 = 4 mod 7
        assert_eq!(r.residue_entries().unwrap(), vec![(0, 0, 4), (0, 1, 3)]);
        assert!(matches!(m.reduce_mod(2), Err(LinalgError::UnreducibleEntry { row: 0, col: 0, prime: 2 })));
    }

    #[test]
    fn integer_and_rational_storage_compare_equal() {
        let a = SparseExactMatrix::from_dense(&[vec![1, 0], vec![0, -2]]);
        let b = SparseExactMatrix::from_rational_triplets(2, 2, vec![(1, 1, q(-4, 2)), (0, 0, q(1, 1))]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn products() {
        let a = SparseExactMatrix::from_dense(&[vec![1, 2], vec![3, 4]]);
        let v = vec![q(1, 1), q(-1, 2)];
        assert_eq!(a.mul_vec(&v).unwrap(), vec![q(0, 1), q(1, 1)]);
        let sq = a.mul(&a).unwrap();
        assert_eq!(sq, SparseExactMatrix::from_dense(&[vec![7, 10], vec![15, 22]]));
        let ext = a.with_column(&[q(5, 1), q(0, 1)]).unwrap();
        assert_eq!(ext.cols(), 3);
        assert_eq!(ext.get(0, 2), Some(q(5, 1)));
        assert_eq!(ext.get(1, 2), None);
    }
}
