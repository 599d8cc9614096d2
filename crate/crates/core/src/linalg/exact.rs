//! Exact rank and kernels over QQ.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{LinalgError, SparseExactMatrix};

/// Exact rank by fraction-free sparse elimination.
///
/// Rows are scaled to integers; a row is reduced by a pivot row with
/// leading coefficient `l` via `row ← (l/g)·row − (a/g)·pivot` where
/// `g = gcd(l, a)`, and each new pivot row is divided by its content.
/// No division ever leaves the integers.
pub fn rank_exact(m: &SparseExactMatrix) -> Result<usize, LinalgError> {
    let rows = m.integer_rows()?;
    let mut vectors: Vec<Vec<(u32, BigInt)>> = rows.into_iter().filter(|r| !r.is_empty()).collect();
    vectors.sort_by_key(|v| v.len());
    let max_rank = vectors.len().min(m.cols());
    let mut pivots: BTreeMap<u32, Vec<(u32, BigInt)>> = BTreeMap::new();
    let mut rank = 0;
    for mut v in vectors {
        v.sort_by_key(|e| e.0);
        loop {
            let Some((lead_col, lead)) = v.first().cloned() else { break };
            match pivots.get(&lead_col) {
                Some(prow) => {
                    let l = &prow[0].1;
                    let g = l.gcd(&lead);
                    v = combine(&v, &(l / &g), prow, &(&lead / &g));
                }
                None => {
                    let content = v.iter().fold(BigInt::zero(), |acc, e| acc.gcd(&e.1));
                    let sign = if lead.is_negative() { -BigInt::one() } else { BigInt::one() };
                    let scale = content * sign;
                    for e in v.iter_mut() {
                        e.1 = &e.1 / &scale;
                    }
                    pivots.insert(lead_col, v);
                    rank += 1;
                    break;
                }
            }
        }
        if rank == max_rank {
            break;
        }
    }
    Ok(rank)
}

// a·x − b·y on sorted sparse vectors.
fn combine(x: &[(u32, BigInt)], a: &BigInt, y: &[(u32, BigInt)], b: &BigInt) -> Vec<(u32, BigInt)> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let take_x = j >= y.len() || (i < x.len() && x[i].0 < y[j].0);
        let take_y = i >= x.len() || (j < y.len() && y[j].0 < x[i].0);
        let (c, v) = if take_x {
            i += 1;
            (x[i - 1].0, a * &x[i - 1].1)
        } else if take_y {
            j += 1;
            (y[j - 1].0, -(b * &y[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (x[i - 1].0, a * &x[i - 1].1 - b * &y[j - 1].1)
        };
        if !v.is_zero() {
            out.push((c, v));
        }
    }
    out
}

/// Reduced row echelon form over QQ: returns the pivot columns and the
/// nonzero rows (each with a leading 1 at its pivot column).
pub(crate) fn rref(m: &SparseExactMatrix) -> Result<Vec<(usize, BTreeMap<usize, BigRational>)>, LinalgError> {
    let entries = m.rational_entries().ok_or(LinalgError::NotRational(m.modulus().unwrap_or(0)))?;
    let mut rows: Vec<BTreeMap<usize, BigRational>> = vec![BTreeMap::new(); m.rows()];
    for (r, c, v) in entries {
        rows[r].insert(c, v);
    }
    let mut pivots: Vec<(usize, BTreeMap<usize, BigRational>)> = Vec::new();
    for mut row in rows {
        for (pc, prow) in &pivots {
            if let Some(a) = row.get(pc).cloned() {
                for (c, v) in prow {
                    let e = row.entry(*c).or_insert_with(BigRational::zero);
                    *e -= &a * v;
                    if e.is_zero() {
                        row.remove(c);
                    }
                }
            }
        }
        let Some((&lead, lv)) = row.iter().next() else { continue };
        let inv = lv.recip();
        for v in row.values_mut() {
            *v *= &inv;
        }
        // Keep earlier pivot rows reduced in the new pivot column.
        for (_, prow) in pivots.iter_mut() {
            if let Some(a) = prow.get(&lead).cloned() {
                for (c, v) in &row {
                    let e = prow.entry(*c).or_insert_with(BigRational::zero);
                    *e -= &a * v;
                    if e.is_zero() {
                        prow.remove(c);
                    }
                }
            }
        }
        pivots.push((lead, row));
    }
    Ok(pivots)
}

/// Basis of the right kernel over QQ.
///
/// One vector per free column `f`: 1 at `f`, minus the RREF entries at the
/// pivot columns, zero elsewhere.
pub fn kernel_basis_exact(m: &SparseExactMatrix, threshold: usize) -> Result<Vec<Vec<BigRational>>, LinalgError> {
    let size = m.rows().max(m.cols());
    if size > threshold {
        return Err(LinalgError::ThresholdExceeded { size, threshold });
    }
    let pivots = rref(m)?;
    let mut is_pivot = vec![false; m.cols()];
    for (pc, _) in &pivots {
        is_pivot[*pc] = true;
    }
    let mut basis = Vec::new();
    for f in (0..m.cols()).filter(|&c| !is_pivot[c]) {
        let mut v = vec![BigRational::zero(); m.cols()];
        v[f] = BigRational::one();
        for (pc, row) in &pivots {
            if let Some(a) = row.get(&f) {
                v[*pc] = -a.clone();
            }
        }
        basis.push(v);
    }
    Ok(basis)
}

/// Scales a rational vector to a primitive integer vector with the same span.
pub fn primitive_integer_vector(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn exact_rank_examples() {
        assert_eq!(rank_exact(&SparseExactMatrix::identity(4)).unwrap(), 4);
        assert_eq!(rank_exact(&SparseExactMatrix::from_dense(&[vec![1, 2], vec![2, 4]])).unwrap(), 1);
        assert_eq!(rank_exact(&SparseExactMatrix::zeros(3, 3)).unwrap(), 0);
        let m = SparseExactMatrix::from_dense(&[vec![2, 4, 6], vec![3, 5, 7], vec![5, 9, 13]]);
        assert_eq!(rank_exact(&m).unwrap(), 2);
    }

    #[test]
    fn exact_rank_rejects_residues() {
        let m = SparseExactMatrix::from_residue_triplets(1, 1, 7, vec![(0, 0, 1)]).unwrap();
        assert!(matches!(rank_exact(&m), Err(LinalgError::NotRational(7))));
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_basis_exact(&SparseExactMatrix::from_dense(&[vec![1, 2], vec![2, 4]]), 100).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(primitive_integer_vector(&k[0]), vec![BigInt::from(-2), BigInt::from(1)]);
        assert!(kernel_basis_exact(&SparseExactMatrix::identity(3), 100).unwrap().is_empty());
        let k = kernel_basis_exact(&SparseExactMatrix::zeros(3, 3), 100).unwrap();
        assert_eq!(k, vec![vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)], vec![q(0), q(0), q(1)]]);
    }

    #[test]
    fn kernel_threshold() {
        let err = kernel_basis_exact(&SparseExactMatrix::zeros(3, 30), 10).unwrap_err();
        assert_eq!(err, LinalgError::ThresholdExceeded { size: 30, threshold: 10 });
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let m = SparseExactMatrix::from_dense(&[vec![1, 1, 0, 2], vec![0, 3, 1, 1], vec![1, 4, 1, 3]]);
        let k = kernel_basis_exact(&m, 100).unwrap();
        assert_eq!(k.len() + rank_exact(&m).unwrap(), 4);
        for v in &k {
            assert!(m.mul_vec(v).unwrap().iter().all(Zero::is_zero));
        }
    }
}
