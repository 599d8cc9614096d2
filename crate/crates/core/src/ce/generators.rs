use std::collections::HashMap;
use std::sync::OnceLock;

use crate::poisson::{enumerate_monomials, monomial_bracket, AlgebraSpec, Monomial};

/// Bumped whenever the canonical monomial order or wedge order changes;
/// part of every cache key.
pub const MONOMIAL_ORDER_VERSION: u32 = 1;

/// One entry of the co-bracket: `[e_a, e_b]` has coefficient `coeff` on the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoBracketTerm {
    pub a: u32,
    pub b: u32,
    pub coeff: i64,
}

/// Dual generators `ξ_m` for every monomial of weight `-1..=max_weight`,
/// indexed by the canonical monomial order.
///
/// Ids are stable across tables: a monomial gets the same id in every
/// table large enough to contain it.
#[derive(Debug)]
pub struct GeneratorTable {
    spec: AlgebraSpec,
    max_weight: i64,
    monomials: Vec<Monomial>,
    charges: Vec<i32>,
    lookup: HashMap<Monomial, u32>,
    // class_start[k] is the first id of weight k-1; one extra sentinel at the end.
    class_start: Vec<usize>,
    cobracket: Vec<OnceLock<Vec<Vec<CoBracketTerm>>>>,
    coadjoint: Vec<OnceLock<Vec<Vec<(u32, i64)>>>>,
}

impl GeneratorTable {
    pub fn new(spec: AlgebraSpec, max_weight: i64) -> Self {
        let max_weight = max_weight.max(0);
        let mut monomials = Vec::new();
        let mut class_start = Vec::new();
        for w in -1..=max_weight {
            class_start.push(monomials.len());
            monomials.extend(enumerate_monomials(spec, w).expect("weight ≥ -1"));
        }
        class_start.push(monomials.len());
        let lookup = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i as u32)).collect();
        let charges = monomials.iter().flat_map(|m| m.charge()).collect();
        let classes = (max_weight + 2) as usize;
        GeneratorTable {
            spec,
            max_weight,
            monomials,
            charges,
            lookup,
            class_start,
            cobracket: (0..classes).map(|_| OnceLock::new()).collect(),
            coadjoint: (0..spec.sp_dimension()).map(|_| OnceLock::new()).collect(),
        }
    }

    /// A table large enough for every wedge of the given cochain weight:
    /// at most 2n linear generators contribute negative weight, so no
    /// generator of such a wedge exceeds weight `w + 2n`.
    pub fn for_cochain_weight(spec: AlgebraSpec, weight: i64) -> Self {
        GeneratorTable::new(spec, weight + 2 * spec.n() as i64)
    }

    pub fn spec(&self) -> AlgebraSpec {
        self.spec
    }

    pub fn max_weight(&self) -> i64 {
        self.max_weight
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomial(&self, id: u32) -> &Monomial {
        &self.monomials[id as usize]
    }

    pub fn id_of(&self, m: &Monomial) -> Option<u32> {
        self.lookup.get(m).copied()
    }

    pub fn weight(&self, id: u32) -> i64 {
        self.monomials[id as usize].weight()
    }

    pub fn charge(&self, id: u32) -> &[i32] {
        let n = self.spec.n();
        &self.charges[id as usize * n..(id as usize + 1) * n]
    }

    /// Id range of generators whose monomial has weight `w`.
    pub fn class(&self, w: i64) -> std::ops::Range<u32> {
        if w < -1 || w > self.max_weight {
            return 0..0;
        }
        let k = (w + 1) as usize;
        self.class_start[k] as u32..self.class_start[k + 1] as u32
    }

    pub fn is_quadratic(&self, id: u32) -> bool {
        self.class(0).contains(&id)
    }

    /// Co-bracket of `ξ_m`: all pairs `a < b` with `[e_a, e_b]` touching `e_m`.
    ///
    /// Built per target weight on first use; concurrent callers block on
    /// initialisation and then share the result.
    pub fn cobracket(&self, target: u32) -> &[CoBracketTerm] {
        let w = self.weight(target);
        let cache = self.cobracket[(w + 1) as usize].get_or_init(|| self.build_cobracket(w));
        let local = target - self.class(w).start;
        &cache[local as usize]
    }

    fn build_cobracket(&self, w: i64) -> Vec<Vec<CoBracketTerm>> {
        let range = self.class(w);
        let mut out = vec![Vec::new(); range.len()];
        // weight(a) ≤ weight(b) since ids are graded; weights sum to w.
        for wa in -1..=w + 1 {
            let wb = w - wa;
            if wb < wa || wb > self.max_weight {
                continue;
            }
            for a in self.class(wa) {
                let b_range = self.class(wb);
                let b_start = if wa == wb { a + 1 } else { b_range.start };
                for b in b_start..b_range.end {
                    for (m, coeff) in monomial_bracket(self.monomial(a), self.monomial(b)) {
                        let id = self.lookup[&m];
                        out[(id - range.start) as usize].push(CoBracketTerm { a, b, coeff });
                    }
                }
            }
        }
        out
    }

    /// Coadjoint action of the quadratic generator `h` on dual generators:
    /// `L_h ξ_m = Σ c ξ_{m'}` with `c = −coeff_m [h, e_{m'}]`, listed per `m`.
    pub fn coadjoint(&self, h: u32) -> &[Vec<(u32, i64)>] {
        assert!(self.is_quadratic(h), "coadjoint action is defined for sp(2n) only");
        let local = (h - self.class(0).start) as usize;
        self.coadjoint[local].get_or_init(|| {
            let mut out = vec![Vec::new(); self.len()];
            let hm = self.monomial(h).clone();
            for mp in 0..self.len() as u32 {
                for (m, c) in monomial_bracket(&hm, self.monomial(mp)) {
                    let id = self.lookup[&m];
                    out[id as usize].push((mp, -c));
                }
            }
            out
        })
    }
}
