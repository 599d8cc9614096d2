mod common;

use common::{bareiss_rank, q};
use hamcoh::linalg::{
    kernel_basis_exact, rank_certified, rank_exact, rank_mod_p, LinalgError, SparseExactMatrix, DEFAULT_PRIMES,
};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(lo..=hi)).collect()).collect()
}

fn product(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    a.iter()
        .map(|row| (0..b[0].len()).map(|j| row.iter().zip(b).map(|(x, brow)| x * brow[j]).sum()).collect())
        .collect()
}

#[test]
fn rank_twelve_product() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(20);
    for _ in 0..5 {
        let a = random_matrix(&mut rng, 20, 12, -9, 9);
        let b = random_matrix(&mut rng, 12, 20, -9, 9);
        let c = product(&a, &b);
        let oracle = bareiss_rank(&c);
        assert_eq!(oracle, 12);
        let m = SparseExactMatrix::from_dense(&c);
        let cert = rank_certified(&m, &DEFAULT_PRIMES, 2000).unwrap();
        assert_eq!(cert.rank, oracle);
        assert!(cert.agreement && cert.exact_confirmed);
        assert_eq!(rank_exact(&m).unwrap(), oracle);
    }
}

#[test]
fn small_examples() {
    let p = 1_000_000_007;
    assert_eq!(rank_mod_p(&SparseExactMatrix::identity(3), p).unwrap(), 3);
    assert_eq!(rank_mod_p(&SparseExactMatrix::from_dense(&[vec![1, 2], vec![2, 4]]), p).unwrap(), 1);
    assert_eq!(rank_mod_p(&SparseExactMatrix::zeros(5, 7), p).unwrap(), 0);

    let k = kernel_basis_exact(&SparseExactMatrix::from_dense(&[vec![1, 2], vec![2, 4]]), 10).unwrap();
    assert_eq!(k.len(), 1);
    assert_eq!(&k[0][0] / &k[0][1], q(-2));
    assert!(kernel_basis_exact(&SparseExactMatrix::identity(3), 10).unwrap().is_empty());
    assert_eq!(kernel_basis_exact(&SparseExactMatrix::zeros(3, 3), 10).unwrap().len(), 3);
    assert!(matches!(
        kernel_basis_exact(&SparseExactMatrix::identity(3), 2),
        Err(LinalgError::ThresholdExceeded { size: 3, threshold: 2 })
    ));
}

#[test]
fn unreducible_entry() {
    let m = SparseExactMatrix::from_rational_triplets(1, 1, vec![(0, 0, BigRational::new(1.into(), 7.into()))]).unwrap();
    assert!(matches!(rank_mod_p(&m, 7), Err(LinalgError::UnreducibleEntry { .. })));
    assert_eq!(rank_mod_p(&m, 11).unwrap(), 1);
}

#[test]
fn kernel_vectors_are_nonzero() {
    let m = SparseExactMatrix::from_dense(&[vec![1, 1, 0], vec![0, 0, 0]]);
    let k = kernel_basis_exact(&m, 10).unwrap();
    assert_eq!(k.len(), 2);
    assert!(k.iter().all(|v| !v.iter().all(BigRational::is_zero)));
}

proptest! {
    #[test]
    fn ranks_agree_with_bareiss(rows in 1usize..9, cols in 1usize..9, seed in any::<u64>(), density in 0.1f64..1.0) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let m: Vec<Vec<i64>> = (0..rows)
            .map(|_| (0..cols).map(|_| if rng.gen_bool(density) { rng.gen_range(-3..=3) } else { 0 }).collect())
            .collect();
        let oracle = bareiss_rank(&m);
        let sparse = SparseExactMatrix::from_dense(&m);
        prop_assert_eq!(rank_exact(&sparse).unwrap(), oracle);
        for p in [2u64, 3, 5] {
            prop_assert!(rank_mod_p(&sparse, p).unwrap() <= oracle);
        }
        prop_assert_eq!(rank_mod_p(&sparse, DEFAULT_PRIMES[1]).unwrap(), oracle);
        prop_assert_eq!(rank_mod_p(&sparse.transpose(), DEFAULT_PRIMES[0]).unwrap(), oracle);
    }

    #[test]
    fn rank_plus_nullity(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let m = SparseExactMatrix::from_dense(&random_matrix(&mut rng, rows, cols, -2, 2));
        let kernel = kernel_basis_exact(&m, 100).unwrap();
        prop_assert_eq!(kernel.len() + rank_exact(&m).unwrap(), cols);
        for v in &kernel {
            prop_assert!(m.mul_vec(v).unwrap().iter().all(BigRational::is_zero));
        }
    }

    #[test]
    fn certificates_are_deterministic(seed in any::<u64>()) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let m = SparseExactMatrix::from_dense(&random_matrix(&mut rng, 6, 7, -4, 4));
        let a = rank_certified(&m, &DEFAULT_PRIMES, 10).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| rank_certified(&m, &DEFAULT_PRIMES, 10).unwrap());
        prop_assert_eq!(a, b);
    }
}
