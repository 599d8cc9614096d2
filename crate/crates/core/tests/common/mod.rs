//! Independent oracles: dense exact linear algebra and the differential
//! computed by evaluating cochains on tuples of algebra elements.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use hamcoh::ce::SectorBasis;
use hamcoh::poisson::{poisson_bracket, PoissonElement};

pub fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Rank by dense Bareiss elimination over the integers.
pub fn bareiss_rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..m).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(rank, p);
        for r in rank + 1..m {
            for c in col + 1..n {
                let v = &a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c];
                a[r][c] = v / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
        if rank == m {
            break;
        }
    }
    rank
}

/// Row echelon form over the rationals; returns the rank.
pub fn dense_rank(mut a: Vec<Vec<BigRational>>) -> usize {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..m).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(rank, p);
        let pivot = a[rank][col].clone();
        for r in 0..m {
            if r != rank && !a[r][col].is_zero() {
                let f = &a[r][col] / &pivot;
                for c in col..n {
                    let v = &a[rank][c] * &f;
                    a[r][c] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Whether `a x = b` has a rational solution.
pub fn solvable(a: &[Vec<BigRational>], b: &[BigRational]) -> bool {
    let augmented: Vec<Vec<BigRational>> =
        a.iter().zip(b).map(|(row, x)| row.iter().cloned().chain(std::iter::once(x.clone())).collect()).collect();
    dense_rank(a.to_vec()) == dense_rank(augmented)
}

/// Sign of the permutation sorting `v`, and the sorted vector; `None` on repeats.
fn sort_sign(v: &[u32]) -> Option<(i64, Vec<u32>)> {
    let mut sign = 1;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            match v[i].cmp(&v[j]) {
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    let mut s = v.to_vec();
    s.sort_unstable();
    Some((sign, s))
}

/// Value of the cochain `c` (coefficients over `basis`) on basis elements
/// `args`, under the determinant pairing of wedges with tuples.
fn evaluate(basis: &SectorBasis, c: &[BigRational], args: &[u32]) -> BigRational {
    match sort_sign(args) {
        None => BigRational::zero(),
        Some((sign, sorted)) => match basis.position(&sorted) {
            Some(i) => &c[i] * q(sign),
            None => BigRational::zero(),
        },
    }
}

/// `(dc)(y_0..y_k) = Σ_{i<j} (−1)^{i+j} c([y_i, y_j], y_0..ŷ_i..ŷ_j..y_k)`
/// on every wedge of `to`, with brackets taken from the Poisson algebra.
pub fn oracle_apply(from: &SectorBasis, to: &SectorBasis, c: &[BigRational]) -> Vec<BigRational> {
    let table = from.table();
    (0..to.len())
        .map(|t| {
            let ys = to.wedge(t);
            let mut acc = BigRational::zero();
            for i in 0..ys.len() {
                for j in i + 1..ys.len() {
                    let a = PoissonElement::monomial(table.monomial(ys[i]).clone());
                    let b = PoissonElement::monomial(table.monomial(ys[j]).clone());
                    let bracket = poisson_bracket(&a, &b, table.spec());
                    let rest: Vec<u32> =
                        ys.iter().enumerate().filter(|&(k, _)| k != i && k != j).map(|(_, &y)| y).collect();
                    for (m, coeff) in bracket.terms() {
                        let Some(id) = table.id_of(m) else { continue };
                        let mut args = vec![id];
                        args.extend_from_slice(&rest);
                        let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                        acc += coeff * q(sign) * evaluate(from, c, &args);
                    }
                }
            }
            acc
        })
        .collect()
}

/// Dense matrix of the oracle differential.
pub fn oracle_matrix(from: &SectorBasis, to: &SectorBasis) -> Vec<Vec<BigRational>> {
    let mut cols = Vec::with_capacity(from.len());
    for k in 0..from.len() {
        let mut e = vec![BigRational::zero(); from.len()];
        e[k] = BigRational::one();
        cols.push(oracle_apply(from, to, &e));
    }
    (0..to.len()).map(|r| cols.iter().map(|col| col[r].clone()).collect()).collect()
}
