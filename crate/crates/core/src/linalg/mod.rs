//! Sparse exact linear algebra: ranks modulo word-sized primes, exact
//! rational ranks and kernels, and multi-modular rank certificates.

mod exact;
mod matrix;
mod modular;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exact::{kernel_basis_exact, primitive_integer_vector, rank_exact};
pub use matrix::{Field, SparseExactMatrix};
pub use modular::rank_mod_p;


/// Two primes just below 2^32, so a product of residues fits in a u64.
pub const DEFAULT_PRIMES: [u64; 2] = [4_294_967_291, 4_294_967_279];

/// Added when the default primes disagree.
pub const FALLBACK_PRIME: u64 = 4_294_967_231;

pub const DEFAULT_EXACT_THRESHOLD: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("entry ({row}, {col}) is outside a {rows}x{cols} matrix")]
    IndexOutOfRange { row: usize, col: usize, rows: usize, cols: usize },
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("matrix dimensions exceed 32-bit indices")]
    TooLarge,
    #[error("{0} is not a prime below 2^32")]
    BadModulus(u64),
    #[error("prime {prime} divides the denominator of entry ({row}, {col})")]
    UnreducibleEntry { row: usize, col: usize, prime: u64 },
    #[error("matrix lives over GF({found}), expected GF({expected})")]
    FieldMismatch { expected: u64, found: u64 },
    #[error("operation needs a rational matrix, got one over GF({0})")]
    NotRational(u64),
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("matrix size {size} exceeds exact elimination threshold {threshold}")]
    ThresholdExceeded { size: usize, threshold: usize },
    #[error("at least two primes are required for a certificate, got {0}")]
    TooFewPrimes(usize),
    #[error("ranks disagree across primes: {per_prime:?}")]
    Disagreement { per_prime: Vec<(u64, usize)>, exact: Option<usize> },
}

/// Deterministic primality test for word-sized moduli (trial division up to 2^16).
pub fn is_word_prime(p: u64) -> bool {
    if p < 2 || p > u32::MAX as u64 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Outcome of a multi-modular rank computation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCertificate {
    pub rank: usize,
    pub primes_used: Vec<u64>,
    pub per_prime: Vec<usize>,
    pub agreement: bool,
    pub exact_confirmed: bool,
}

impl RankCertificate {
    /// The certificate of the zero map.
    pub fn trivial() -> Self {
        RankCertificate { rank: 0, primes_used: Vec::new(), per_prime: Vec::new(), agreement: true, exact_confirmed: true }
    }

    /// Combines certificates of diagonal blocks: ranks add, per-prime ranks
    /// add when both blocks used the same primes, flags conjoin.
    pub fn merge(&mut self, other: &RankCertificate) {
        self.rank += other.rank;
        if self.primes_used.is_empty() {
            self.primes_used = other.primes_used.clone();
            self.per_prime = other.per_prime.clone();
        } else if self.primes_used == other.primes_used && self.per_prime.len() == other.per_prime.len() {
            for (a, b) in self.per_prime.iter_mut().zip(&other.per_prime) {
                *a += b;
            }
        } else if !other.primes_used.is_empty() {
            for &p in &other.primes_used {
                if !self.primes_used.contains(&p) {
                    self.primes_used.push(p);
                }
            }
            self.per_prime = Vec::new();
        }
        self.agreement &= other.agreement;
        self.exact_confirmed &= other.exact_confirmed;
    }
}

/// Rank modulo every prime; agreeing ranks are certified, and matrices no
/// larger than `exact_threshold` are also confirmed by exact elimination.
///
/// Reduction mod p can only lower the rank, so agreement of independent
/// primes with each other (and with the exact rank when computed) is the
/// certificate.
pub fn rank_certified(
    m: &SparseExactMatrix,
    primes: &[u64],
    exact_threshold: usize,
) -> Result<RankCertificate, LinalgError> {
    if primes.len() < 2 {
        return Err(LinalgError::TooFewPrimes(primes.len()));
    }
    if m.modulus().is_some() {
        return Err(LinalgError::NotRational(m.modulus().unwrap()));
    }
    if m.is_zero() {
        return Ok(RankCertificate {
            rank: 0,
            primes_used: primes.to_vec(),
            per_prime: vec![0; primes.len()],
            agreement: true,
            exact_confirmed: true,
        });
    }
    let per_prime: Vec<usize> = primes
        .par_iter()
        .map(|&p| rank_mod_p(m, p))
        .collect::<Result<_, _>>()?;
    let agreement = per_prime.windows(2).all(|w| w[0] == w[1]);
    let exact = if m.rows().max(m.cols()) <= exact_threshold {
        Some(rank_exact(m)?)
    } else {
        None
    };
    if !agreement || exact.is_some_and(|e| e != per_prime[0]) {
        return Err(LinalgError::Disagreement {
            per_prime: primes.iter().copied().zip(per_prime).collect(),
            exact,
        });
    }
    Ok(RankCertificate {
        rank: per_prime[0],
        primes_used: primes.to_vec(),
        per_prime,
        agreement,
        exact_confirmed: exact.is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_primes_are_prime_and_word_safe() {
        for p in DEFAULT_PRIMES.iter().chain([FALLBACK_PRIME].iter()) {
            assert!(is_word_prime(*p));
            assert!((p - 1).checked_mul(p - 1).is_some());
        }
        assert!(!is_word_prime(4_294_967_295));
        assert!(!is_word_prime(1));
    }

    #[test]
    fn identity_certificate() {
        let cert = rank_certified(&SparseExactMatrix::identity(4), &DEFAULT_PRIMES, 4).unwrap();
        assert_eq!(cert.rank, 4);
        assert!(cert.agreement && cert.exact_confirmed);
        let cert = rank_certified(&SparseExactMatrix::identity(4), &DEFAULT_PRIMES, 3).unwrap();
        assert!(cert.agreement && !cert.exact_confirmed);
    }

    #[test]
    fn bad_prime_is_signalled() {
        let p1 = 1_000_003;
        let p2 = 1_000_033;
        let m = SparseExactMatrix::from_dense(&[vec![p1 as i64, 0], vec![0, 1]]);
        match rank_certified(&m, &[p1, p2], 0) {
            Err(LinalgError::Disagreement { per_prime, exact }) => {
                assert_eq!(per_prime, vec![(p1, 1), (p2, 2)]);
                assert_eq!(exact, None);
            }
            other => panic!("expected disagreement, got {other:?}"),
        }
    }

    #[test]
    fn needs_two_primes() {
        assert_eq!(
            rank_certified(&SparseExactMatrix::identity(1), &[DEFAULT_PRIMES[0]], 10),
            Err(LinalgError::TooFewPrimes(1))
        );
    }

    #[test]
    fn merge_blocks() {
        let mut a = RankCertificate { rank: 2, primes_used: vec![5, 7], per_prime: vec![2, 2], agreement: true, exact_confirmed: true };
        let b = RankCertificate { rank: 3, primes_used: vec![5, 7], per_prime: vec![3, 3], agreement: true, exact_confirmed: false };
        a.merge(&b);
        assert_eq!(a.rank, 5);
        assert_eq!(a.per_prime, vec![5, 5]);
        assert!(a.agreement && !a.exact_confirmed);
        let mut t = RankCertificate::trivial();
        t.merge(&a);
        assert_eq!((t.rank, t.per_prime.clone()), (5, vec![5, 5]));
    }
}
