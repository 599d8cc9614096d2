mod common;

use common::dense_rank;
use hamcoh::model::{model_basis, model_differential, predicted_betti, ModelMonomial};
use hamcoh::{AlgebraSpec, GammaDegree, GkfModel};
use proptest::prelude::*;

#[test]
fn basis_respects_truncation() {
    for n in 1..=3 {
        let basis = model_basis(n, 40).unwrap();
        assert!(basis.iter().all(ModelMonomial::is_nonzero));
        assert!(basis.contains(&ModelMonomial::unit(n)));
        let mut sorted = basis.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), basis.len());
    }
}

#[test]
fn predictions_match_dense_ranks() {
    for n in 1..=3 {
        let model = GkfModel::new(AlgebraSpec::new(n).unwrap(), GammaDegree::default());
        let top = model.top_degree();
        for w in [0i64, -2, -4] {
            let table = model.predicted_betti(w, 0..=top, false).unwrap();
            for row in &table.rows {
                let d = row.degree;
                let rank_of = |from: usize| {
                    let m = model.differential(&model.basis_in(from, w), &model.basis_in(from + 1, w));
                    dense_rank(m.to_dense())
                };
                let rank_in = if d == 0 { 0 } else { rank_of(d - 1) };
                assert_eq!(row.rank_out, rank_of(d), "n={n} w={w} d={d}");
                assert_eq!(row.rank_in, rank_in);
            }
            table.check_invariants().unwrap();
        }
    }
}

#[test]
fn d_squared_is_zero_up_to_n4() {
    for n in 1..=4 {
        let ds = model_differential(n, 30).unwrap();
        for pair in ds.windows(2) {
            assert!(pair[1].mul(&pair[0]).unwrap().is_zero(), "n={n}");
        }
    }
}

#[test]
fn weight_zero_prediction_n1() {
    let t = predicted_betti(1, 0, 10, true).unwrap();
    assert_eq!(t.nonzero().into_iter().collect::<Vec<_>>(), [(7, 1)]);
    assert!(predicted_betti(1, 2, 10, true).is_err());
}

proptest! {
    #[test]
    fn degrees_are_additive_and_weights_even(n in 1usize..4, i in 0usize..40, j in 0usize..40) {
        let basis = model_basis(n, 30).unwrap();
        let a = &basis[i % basis.len()];
        let b = &basis[j % basis.len()];
        let g = GammaDegree::default();
        prop_assert_eq!(a.weight() % 2, 0);
        let model = GkfModel::new(AlgebraSpec::new(n).unwrap(), g);
        for (image, coeff) in model.apply_d(a) {
            prop_assert_eq!(image.degree(g), a.degree(g) + 1);
            prop_assert_eq!(image.weight(), a.weight());
            prop_assert!(coeff != 0);
        }
        prop_assert!(b.degree(g) <= 30);
    }
}
