mod common;

use std::sync::Arc;

use common::oracle_matrix;
use hamcoh::ce::{
    assemble_differential, assemble_sp_action, enumerate_sector, relative_sector, top_degree, GeneratorScope,
    GeneratorTable, SectorBasis,
};
use hamcoh::poisson::sp_basis;
use hamcoh::AlgebraSpec;
use num_rational::BigRational;
use num_traits::Zero;

fn spec(n: usize) -> AlgebraSpec {
    AlgebraSpec::new(n).unwrap()
}

fn sectors(n: usize, weight: i64) -> Vec<SectorBasis> {
    let s = spec(n);
    let table = Arc::new(GeneratorTable::for_cochain_weight(s, weight));
    let top = top_degree(s, weight).unwrap_or(0);
    (0..=top + 1).map(|d| SectorBasis::enumerate(&table, GeneratorScope::All, d, weight, None)).collect()
}

#[test]
fn sector_sizes() {
    assert_eq!(enumerate_sector(spec(1), 2, 0).len(), 11);
    assert_eq!(enumerate_sector(spec(1), 7, 0).len(), 6);
    assert_eq!(enumerate_sector(spec(1), 8, 0).len(), 0);
    for d in 8..12 {
        assert!(enumerate_sector(spec(1), d, 0).is_empty());
    }
    assert_eq!(top_degree(spec(1), 0), Some(7));
}

#[test]
fn enumeration_is_deterministic() {
    let a = enumerate_sector(spec(1), 4, 0).wedges();
    let b = enumerate_sector(spec(1), 4, 0).wedges();
    assert_eq!(a, b);
    assert!(a.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn d_squared_is_zero() {
    for (n, weights) in [(1, vec![-4, -3, -2, -1, 0, 1, 2]), (2, vec![-6, -5, -4])] {
        for w in weights {
            let s = sectors(n, w);
            for d in 0..s.len().saturating_sub(2) {
                let a = assemble_differential(&s[d], &s[d + 1]).unwrap();
                let b = assemble_differential(&s[d + 1], &s[d + 2]).unwrap();
                assert!(b.mul(&a).unwrap().is_zero(), "n={n} w={w} d={d}");
            }
        }
    }
}

#[test]
fn differential_matches_evaluation_formula() {
    for w in [-2, -1, 0, 1] {
        let s = sectors(1, w);
        for d in 0..s.len() - 1 {
            let assembled = assemble_differential(&s[d], &s[d + 1]).unwrap().to_dense();
            let oracle = oracle_matrix(&s[d], &s[d + 1]);
            assert_eq!(assembled, oracle, "w={w} d={d}");
        }
    }
}

#[test]
fn differential_matches_evaluation_formula_n2() {
    let s = sectors(2, -5);
    for d in 0..s.len() - 1 {
        let assembled = assemble_differential(&s[d], &s[d + 1]).unwrap().to_dense();
        assert_eq!(assembled, oracle_matrix(&s[d], &s[d + 1]), "d={d}");
    }
}

#[test]
fn zero_cochain_maps_to_zero() {
    let s = sectors(1, 0);
    assert!(assemble_differential(&s[0], &s[1]).unwrap().is_zero());
    assert!(assemble_differential(&s[7], &s[8]).unwrap().is_zero());
    assert_eq!(assemble_differential(&s[7], &s[8]).unwrap().rows(), 0);
}

#[test]
fn mismatched_sectors_rejected() {
    let a = enumerate_sector(spec(1), 2, 0);
    let b = enumerate_sector(spec(1), 3, -2);
    assert!(assemble_differential(&a, &b).is_err());
    let c = enumerate_sector(spec(1), 4, 0);
    assert!(assemble_differential(&a, &c).is_err());
}

#[test]
fn sp_action_commutes_with_d() {
    for w in [-2, 0, 1] {
        let s = sectors(1, w);
        for h in sp_basis(spec(1)) {
            for d in 0..s.len() - 1 {
                let dm = assemble_differential(&s[d], &s[d + 1]).unwrap();
                let l0 = assemble_sp_action(&s[d], &h).unwrap();
                let l1 = assemble_sp_action(&s[d + 1], &h).unwrap();
                assert_eq!(l0.rows(), l0.cols());
                assert_eq!(l1.mul(&dm).unwrap(), dm.mul(&l0).unwrap(), "w={w} d={d} h={h}");
            }
        }
    }
}

#[test]
fn sp_action_rejects_non_quadratic() {
    let s = enumerate_sector(spec(1), 2, 0);
    let cubic = hamcoh::Monomial::new(vec![3, 0]).unwrap();
    assert!(assemble_sp_action(&s, &cubic).is_err());
}

#[test]
fn relative_invariants() {
    let s = spec(1);
    for w in [-4, -2, 0] {
        for d in 0..=9 {
            let rel = relative_sector(s, d, w).unwrap();
            let abs = enumerate_sector(s, d, w);
            assert!(rel.dim() <= abs.len());
            assert!(rel.horizontal.iter().all(|wedge| !wedge.iter().any(|&g| rel.horizontal.table().is_quadratic(g))));
            for h in sp_basis(s) {
                let l = assemble_sp_action(&rel.horizontal, &h).unwrap();
                for v in &rel.invariants {
                    assert!(l.mul_vec(v).unwrap().iter().all(BigRational::is_zero), "w={w} d={d} h={h}");
                }
            }
        }
    }
    assert_eq!(relative_sector(s, 0, 0).unwrap().dim(), 1);
    let rel = relative_sector(s, 2, 0).unwrap();
    assert_eq!(rel.horizontal.len(), 8);
}

#[test]
fn relative_gamma_is_the_symplectic_form() {
    let s = spec(1);
    assert_eq!(relative_sector(s, 1, -2).unwrap().dim(), 0);
    let rel = relative_sector(s, 2, -2).unwrap();
    assert_eq!(rel.dim(), 1);
    let monos: Vec<String> = rel.horizontal.wedge_monomials(0).iter().map(|m| m.to_string()).collect();
    assert_eq!(monos, ["p", "q"]);
    assert!(!rel.invariants[0][0].is_zero());
}

#[test]
fn invariant_differential_squares_to_zero() {
    use hamcoh::ce::{assemble_invariant_differential, monomial_symmetries, OrbitBasis};
    for (n, w) in [(1, 0), (1, -2), (2, -4), (2, -3)] {
        let s = spec(n);
        let table = Arc::new(GeneratorTable::for_cochain_weight(s, w));
        let group = monomial_symmetries(&table);
        let zero = vec![0; n];
        let top = top_degree(s, w).unwrap_or(0);
        let bases: Vec<OrbitBasis> = (0..=top + 1)
            .map(|d| OrbitBasis::new(SectorBasis::enumerate(&table, GeneratorScope::All, d, w, Some(&zero)), &group))
            .collect();
        for d in 0..bases.len() - 2 {
            let a = assemble_invariant_differential(&bases[d], &bases[d + 1]).unwrap();
            let b = assemble_invariant_differential(&bases[d + 1], &bases[d + 2]).unwrap();
            assert!(b.mul(&a).unwrap().is_zero(), "n={n} w={w} d={d}");
        }
    }
}

#[test]
fn symmetries_commute_with_d() {
    use hamcoh::ce::monomial_symmetries;
    let s = spec(2);
    let w = -4;
    let table = Arc::new(GeneratorTable::for_cochain_weight(s, w));
    let zero = [0, 0];
    let from = SectorBasis::enumerate(&table, GeneratorScope::All, 5, w, Some(&zero));
    let to = SectorBasis::enumerate(&table, GeneratorScope::All, 6, w, Some(&zero));
    let d = assemble_differential(&from, &to).unwrap().to_dense();
    for g in monomial_symmetries(&table) {
        // g d e_k == d g e_k for every basis wedge
        for k in 0..from.len() {
            let (sk, gk) = g.apply_wedge(from.wedge(k));
            let col = from.position(&gk).unwrap();
            for r in 0..to.len() {
                let (sr, gr) = g.apply_wedge(to.wedge(r));
                let r2 = to.position(&gr).unwrap();
                assert_eq!(&d[r][k] * BigRational::from_integer(sr.into()), &d[r2][col] * BigRational::from_integer(sk.into()));
            }
        }
    }
}
