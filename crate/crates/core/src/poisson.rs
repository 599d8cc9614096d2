//! Formal Hamiltonian vector fields on the 2n-disk.
//!
//! Elements are polynomials in Darboux coordinates `p_1..p_n, q_1..q_n`
//! modulo constants, with the Poisson bracket
//! `{f, g} = Σ_i ∂f/∂p_i ∂g/∂q_i − ∂f/∂q_i ∂g/∂p_i`. Every fixed-weight
//! component is finite dimensional, so polynomials suffice for all
//! weight-homogeneous computations.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PoissonError {
    #[error("algebra rank n must be at least 1")]
    ZeroRank,
    #[error("no monomials of weight {0}; weights start at -1")]
    WeightBelowRange(i64),
    #[error("constant monomials are not elements of the algebra")]
    Constant,
    #[error("exponent vector has length {got}, expected an even positive length")]
    BadArity { got: usize },
}

/// Number of Darboux pairs: the algebra acts on a 2n-dimensional space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AlgebraSpec {
    n: usize,
}

impl AlgebraSpec {
    pub fn new(n: usize) -> Result<Self, PoissonError> {
        if n == 0 {
            return Err(PoissonError::ZeroRank);
        }
        Ok(AlgebraSpec { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of variables, 2n.
    pub fn variables(&self) -> usize {
        2 * self.n
    }

    /// dim sp(2n) = n(2n+1), the number of quadratic monomials.
    pub fn sp_dimension(&self) -> usize {
        self.n * (2 * self.n + 1)
    }
}

/// A non-constant monomial `p^a q^b` stored as its exponent vector.
///
/// The first `n` slots are p-exponents, the last `n` are q-exponents.
/// Monomials are ordered by total degree, then lexicographically
/// *descending* on exponents, so that `p` precedes `q` and `p²` precedes
/// `pq`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    exponents: Box<[u16]>,
    degree: u32,
}

impl Monomial {
    pub fn new(exponents: Vec<u16>) -> Result<Self, PoissonError> {
        if exponents.is_empty() || exponents.len() % 2 != 0 {
            return Err(PoissonError::BadArity {
                got: exponents.len(),
            });
        }
        let degree: u32 = exponents.iter().map(|&e| e as u32).sum();
        if degree == 0 {
            return Err(PoissonError::Constant);
        }
        Ok(Monomial {
            exponents: exponents.into_boxed_slice(),
            degree,
        })
    }

    /// The linear monomial `p_i` (0-based `i`).
    pub fn p(spec: AlgebraSpec, i: usize) -> Self {
        let mut e = vec![0; spec.variables()];
        e[i] = 1;
        Monomial::new(e).expect("linear monomial")
    }

    /// The linear monomial `q_i` (0-based `i`).
    pub fn q(spec: AlgebraSpec, i: usize) -> Self {
        let mut e = vec![0; spec.variables()];
        e[spec.n() + i] = 1;
        Monomial::new(e).expect("linear monomial")
    }

    pub fn exponents(&self) -> &[u16] {
        &self.exponents
    }

    pub fn n(&self) -> usize {
        self.exponents.len() / 2
    }

    pub fn total_degree(&self) -> u32 {
        self.degree
    }

    /// Diagonal weight: total degree minus two.
    pub fn weight(&self) -> i64 {
        self.degree as i64 - 2
    }

    pub fn p_degree(&self) -> u32 {
        self.exponents[..self.n()].iter().map(|&e| e as u32).sum()
    }

    pub fn q_degree(&self) -> u32 {
        self.exponents[self.n()..].iter().map(|&e| e as u32).sum()
    }

    /// Bigrading `(deg_p − 1, deg_q − 1)`; additive under the bracket.
    pub fn bidegree(&self) -> (i64, i64) {
        (self.p_degree() as i64 - 1, self.q_degree() as i64 - 1)
    }

    /// Torus charge `(deg_{p_i} − deg_{q_i})_i`; additive under the bracket.
    pub fn charge(&self) -> Vec<i32> {
        let n = self.n();
        (0..n)
            .map(|i| self.exponents[i] as i32 - self.exponents[n + i] as i32)
            .collect()
    }

    pub fn is_linear(&self) -> bool {
        self.degree == 1
    }

    pub fn is_quadratic(&self) -> bool {
        self.degree == 2
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| other.exponents.cmp(&self.exponents))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.n();
        let mut first = true;
        for (slot, &e) in self.exponents.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            let letter = if slot < n { 'p' } else { 'q' };
            if n == 1 {
                write!(f, "{letter}")?;
            } else {
                write!(f, "{letter}{}", slot % n + 1)?;
            }
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Bracket of two monomials with integer coefficients.
///
/// For each Darboux pair `i` both terms of the bracket land on the same
/// monomial `x^(a+b−e_{p_i}−e_{q_i})` with coefficient
/// `a_{p_i} b_{q_i} − a_{q_i} b_{p_i}`. Constant results are dropped.
pub fn monomial_bracket(a: &Monomial, b: &Monomial) -> Vec<(Monomial, i64)> {
    debug_assert_eq!(a.exponents.len(), b.exponents.len());
    let n = a.n();
    if a.degree + b.degree <= 2 {
        // only a constant (or nothing) can come out
        return Vec::new();
    }
    let mut out = Vec::new();
    for i in 0..n {
        let (ap, aq) = (a.exponents[i] as i64, a.exponents[n + i] as i64);
        let (bp, bq) = (b.exponents[i] as i64, b.exponents[n + i] as i64);
        let coeff = ap * bq - aq * bp;
        if coeff == 0 {
            continue;
        }
        let mut e: Vec<u16> = a
            .exponents
            .iter()
            .zip(b.exponents.iter())
            .map(|(x, y)| x + y)
            .collect();
        e[i] -= 1;
        e[n + i] -= 1;
        out.push((Monomial::new(e).expect("degree ≥ 1"), coeff));
    }
    out
}

/// A finite rational combination of non-constant monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PoissonElement {
    terms: BTreeMap<Monomial, BigRational>,
}

impl PoissonElement {
    pub fn zero() -> Self {
        PoissonElement::default()
    }

    pub fn monomial(m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(m, BigRational::one());
        PoissonElement { terms }
    }

    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, BigRational)>,
    {
        let mut el = PoissonElement::zero();
        for (m, c) in terms {
            el.add_term(m, c);
        }
        el
    }

    /// Adds `c·m`, dropping the entry if the coefficient cancels.
    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &PoissonElement) -> PoissonElement {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> PoissonElement {
        if c.is_zero() {
            return PoissonElement::zero();
        }
        PoissonElement {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    pub fn neg(&self) -> PoissonElement {
        self.scale(&-BigRational::one())
    }

    pub fn sub(&self, other: &PoissonElement) -> PoissonElement {
        self.add(&other.neg())
    }

    /// The common weight of all terms, if the element is homogeneous and nonzero.
    pub fn weight(&self) -> Option<i64> {
        let mut weights = self.terms.keys().map(Monomial::weight);
        let first = weights.next()?;
        weights.all(|w| w == first).then_some(first)
    }
}

impl fmt::Display for PoissonElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "({c})*{m}")?;
            }
        }
        Ok(())
    }
}

/// Poisson bracket with the constant term projected out.
pub fn poisson_bracket(
    f: &PoissonElement,
    g: &PoissonElement,
    spec: AlgebraSpec,
) -> PoissonElement {
    let mut out = PoissonElement::zero();
    for (a, ca) in f.terms() {
        debug_assert_eq!(a.n(), spec.n());
        for (b, cb) in g.terms() {
            let prod = ca * cb;
            for (m, k) in monomial_bracket(a, b) {
                out.add_term(m, &prod * BigRational::from_integer(BigInt::from(k)));
            }
        }
    }
    out
}

/// All monomials of the given weight in canonical order.
pub fn enumerate_monomials(spec: AlgebraSpec, weight: i64) -> Result<Vec<Monomial>, PoissonError> {
    if weight < -1 {
        return Err(PoissonError::WeightBelowRange(weight));
    }
    let degree = (weight + 2) as u16;
    let mut out = Vec::new();
    let mut current = vec![0u16; spec.variables()];
    fill_descending(&mut current, 0, degree, &mut out);
    Ok(out)
}

// Emits exponent vectors of the given remaining degree in descending
// lexicographic order.
fn fill_descending(current: &mut Vec<u16>, slot: usize, remaining: u16, out: &mut Vec<Monomial>) {
    if slot + 1 == current.len() {
        current[slot] = remaining;
        out.push(Monomial::new(current.clone()).expect("degree ≥ 1"));
        current[slot] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[slot] = e;
        fill_descending(current, slot + 1, remaining - e, out);
    }
    current[slot] = 0;
}

/// The quadratic monomials, spanning the subalgebra sp(2n).
pub fn sp_basis(spec: AlgebraSpec) -> Vec<Monomial> {
    enumerate_monomials(spec, 0).expect("weight 0 is in range")
}

/// `C(a, b)` as u128; small arguments only.
pub fn binomial(a: u64, b: u64) -> u128 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc * (a - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(n: usize) -> AlgebraSpec {
        AlgebraSpec::new(n).unwrap()
    }

    fn mono(e: &[u16]) -> Monomial {
        Monomial::new(e.to_vec()).unwrap()
    }

    fn el(e: &[u16]) -> PoissonElement {
        PoissonElement::monomial(mono(e))
    }

    fn int(k: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(k))
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert_eq!(AlgebraSpec::new(0), Err(PoissonError::ZeroRank));
        assert_eq!(Monomial::new(vec![0, 0]), Err(PoissonError::Constant));
        assert!(matches!(
            Monomial::new(vec![1, 0, 0]),
            Err(PoissonError::BadArity { got: 3 })
        ));
        assert_eq!(
            enumerate_monomials(spec(1), -2),
            Err(PoissonError::WeightBelowRange(-2))
        );
    }

    #[test]
    fn bracket_of_darboux_pair_is_projected_constant() {
        let s = spec(1);
        assert!(poisson_bracket(&el(&[1, 0]), &el(&[0, 1]), s).is_zero());
    }

    #[test]
    fn bracket_examples_n1() {
        let s = spec(1);
        let b = poisson_bracket(&el(&[2, 0]), &el(&[0, 2]), s);
        assert_eq!(b, PoissonElement::from_terms([(mono(&[1, 1]), int(4))]));
        let b = poisson_bracket(&el(&[2, 0]), &el(&[0, 1]), s);
        assert_eq!(b, PoissonElement::from_terms([(mono(&[1, 0]), int(2))]));
    }

    #[test]
    fn monomial_invariants() {
        let m = mono(&[1, 0]);
        assert_eq!((m.total_degree(), m.weight()), (1, -1));
        assert!(m.is_linear());
        let m = mono(&[1, 1]);
        assert_eq!((m.total_degree(), m.weight()), (2, 0));
        assert!(m.is_quadratic());
        assert_eq!(mono(&[2, 0, 1, 0]).charge(), vec![1, 0]);
        assert_eq!(mono(&[3, 1]).bidegree(), (2, 0));
    }

    #[test]
    fn enumeration_examples() {
        let s = spec(1);
        let lin = enumerate_monomials(s, -1).unwrap();
        assert_eq!(lin, vec![mono(&[1, 0]), mono(&[0, 1])]);
        let quad = enumerate_monomials(s, 0).unwrap();
        assert_eq!(quad, vec![mono(&[2, 0]), mono(&[1, 1]), mono(&[0, 2])]);
        assert_eq!(enumerate_monomials(spec(2), -1).unwrap().len(), 4);
    }

    #[test]
    fn enumeration_matches_binomial_count_and_order() {
        for n in 1..=3 {
            let s = spec(n);
            for w in -1..=4i64 {
                let ms = enumerate_monomials(s, w).unwrap();
                let expected = binomial((w + 2) as u64 + 2 * n as u64 - 1, 2 * n as u64 - 1);
                assert_eq!(ms.len() as u128, expected, "n={n} w={w}");
                assert!(ms.windows(2).all(|p| p[0] < p[1]));
                assert!(ms.iter().all(|m| m.weight() == w));
            }
        }
    }

    #[test]
    fn sp_basis_dimension_and_closure() {
        for n in 1..=3 {
            let s = spec(n);
            let basis = sp_basis(s);
            assert_eq!(basis.len(), s.sp_dimension());
            for a in &basis {
                for b in &basis {
                    for (m, _) in monomial_bracket(a, b) {
                        assert!(m.is_quadratic());
                    }
                }
            }
        }
        assert_eq!(spec(2).sp_dimension(), 10);
    }

    #[test]
    fn jacobi_exhaustive_low_degree_n1() {
        let s = spec(1);
        let monos: Vec<PoissonElement> = (-1..=2)
            .flat_map(|w| enumerate_monomials(s, w).unwrap())
            .map(PoissonElement::monomial)
            .collect();
        assert_eq!(monos.len(), 2 + 3 + 4 + 5);
        for f in &monos {
            for g in &monos {
                let fg = poisson_bracket(f, g, s);
                for h in &monos {
                    let a = poisson_bracket(f, &poisson_bracket(g, h, s), s);
                    let b = poisson_bracket(g, &poisson_bracket(h, f, s), s);
                    let c = poisson_bracket(h, &fg, s);
                    assert!(a.add(&b).add(&c).is_zero(), "{f}, {g}, {h}");
                }
            }
        }
    }

    fn arb_monomial(n: usize, max_deg: u16) -> impl Strategy<Value = Monomial> {
        prop::collection::vec(0..=max_deg, 2 * n)
            .prop_filter("non-constant", |e| e.iter().any(|&x| x > 0))
            .prop_map(|e| Monomial::new(e).unwrap())
    }

    fn arb_element(n: usize) -> impl Strategy<Value = PoissonElement> {
        prop::collection::vec((arb_monomial(n, 3), -5i64..=5), 1..4).prop_map(|ts| {
            PoissonElement::from_terms(ts.into_iter().map(|(m, c)| (m, int(c))))
        })
    }

    fn arb_homogeneous(n: usize) -> impl Strategy<Value = PoissonElement> {
        (1u32..=4).prop_flat_map(move |deg| {
            let ms = enumerate_monomials(AlgebraSpec::new(n).unwrap(), deg as i64 - 2).unwrap();
            let len = ms.len();
            prop::collection::vec((0..len, 1i64..=4), 1..4).prop_map(move |picks| {
                PoissonElement::from_terms(picks.into_iter().map(|(i, c)| (ms[i].clone(), int(c))))
            })
        })
    }

    proptest! {
        #[test]
        fn antisymmetry(f in arb_element(2), g in arb_element(2)) {
            let s = spec(2);
            prop_assert_eq!(poisson_bracket(&f, &g, s), poisson_bracket(&g, &f, s).neg());
        }

        #[test]
        fn jacobi_random(f in arb_element(2), g in arb_element(2), h in arb_element(2)) {
            let s = spec(2);
            let a = poisson_bracket(&f, &poisson_bracket(&g, &h, s), s);
            let b = poisson_bracket(&g, &poisson_bracket(&h, &f, s), s);
            let c = poisson_bracket(&h, &poisson_bracket(&f, &g, s), s);
            prop_assert!(a.add(&b).add(&c).is_zero());
        }

        #[test]
        fn weight_additivity(f in arb_homogeneous(2), g in arb_homogeneous(2)) {
            let s = spec(2);
            let (wf, wg) = (f.weight().unwrap(), g.weight().unwrap());
            for (m, _) in poisson_bracket(&f, &g, s).terms() {
                prop_assert_eq!(m.weight(), wf + wg);
            }
        }

        #[test]
        fn bidegree_and_charge_additivity(a in arb_monomial(2, 3), b in arb_monomial(2, 3)) {
            for (m, _) in monomial_bracket(&a, &b) {
                let (ba, bb, bm) = (a.bidegree(), b.bidegree(), m.bidegree());
                prop_assert_eq!(bm, (ba.0 + bb.0, ba.1 + bb.1));
                let ch: Vec<i32> = a.charge().iter().zip(b.charge()).map(|(x, y)| x + y).collect();
                prop_assert_eq!(m.charge(), ch);
            }
        }
    }
}
