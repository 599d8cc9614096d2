//! Reduction of charge-zero sectors by the monomial subgroup of Sp(2n).
//!
//! Quarter turns `p_i ↦ q_i, q_i ↦ −p_i` and permutations of the index
//! `i` are linear symplectic maps, hence Lie algebra automorphisms of
//! 𝔥₂ₙ permuting monomials up to sign. The connected group Sp(2n) acts
//! trivially on cohomology, so the invariant subcomplex computes it. On
//! charge zero a double quarter turn acts trivially, leaving a group of
//! order `2ⁿ n!` to average over.

use rayon::prelude::*;

use super::assemble::{differential_columns, sort_with_sign};
use super::generators::GeneratorTable;
use super::sector::SectorBasis;
use super::CeError;
use crate::linalg::SparseExactMatrix;
use crate::poisson::Monomial;

/// One group element as a signed permutation of generator ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedPermutation {
    image: Vec<u32>,
    sign: Vec<i8>,
}

impl SignedPermutation {
    pub fn apply(&self, id: u32) -> (u32, i64) {
        (self.image[id as usize], self.sign[id as usize] as i64)
    }

    /// Image of a wedge, re-sorted, with the total sign.
    pub fn apply_wedge(&self, wedge: &[u32]) -> (i64, Vec<u32>) {
        let mut sign = 1;
        let mut out = Vec::with_capacity(wedge.len());
        for &g in wedge {
            let (h, s) = self.apply(g);
            sign *= s;
            out.push(h);
        }
        let (s, sorted) = sort_with_sign(out).expect("a permutation keeps generators distinct");
        (sign * s, sorted)
    }
}

/// Image of `p^a q^b` under the index permutation `perm` after quarter
/// turns on the pairs flagged in `turns`.
fn transform(m: &Monomial, perm: &[usize], turns: &[bool]) -> (Monomial, i8) {
    let n = m.n();
    let e = m.exponents();
    let mut out = vec![0u16; 2 * n];
    let mut sign = 1i8;
    for i in 0..n {
        let (a, b) = (e[i], e[n + i]);
        let (a, b) = if turns[i] {
            if b % 2 == 1 {
                sign = -sign;
            }
            (b, a)
        } else {
            (a, b)
        };
        out[perm[i]] = a;
        out[n + perm[i]] = b;
    }
    (Monomial::new(out).expect("degree is preserved"), sign)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Coset representatives of the monomial symplectic group modulo double
/// quarter turns, as signed permutations of the table's generators.
pub fn monomial_symmetries(table: &GeneratorTable) -> Vec<SignedPermutation> {
    let n = table.spec().n();
    let mut out = Vec::new();
    for perm in permutations(n) {
        for mask in 0..1usize << n {
            let turns: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            let mut image = Vec::with_capacity(table.len());
            let mut sign = Vec::with_capacity(table.len());
            for id in 0..table.len() as u32 {
                let (m, s) = transform(table.monomial(id), &perm, &turns);
                image.push(table.id_of(&m).expect("tables are closed under linear symplectic maps"));
                sign.push(s);
            }
            out.push(SignedPermutation { image, sign });
        }
    }
    out
}

/// Basis of the invariant cochains of a charge-zero sector: one orbit sum
/// per orbit whose stabilizer acts without sign.
#[derive(Clone, Debug)]
pub struct OrbitBasis {
    sector: SectorBasis,
    reps: Vec<usize>,
    // For each wedge v: O(v) = sign · O(reps[index]), or None if O(v) = 0.
    canon: Vec<Option<(u32, i8)>>,
}

impl OrbitBasis {
    pub fn new(sector: SectorBasis, group: &[SignedPermutation]) -> OrbitBasis {
        // Orbit sum coefficient on the least wedge of the orbit; for the
        // least wedge itself it is |Stab| or 0, hence never negative.
        let leaders: Vec<(usize, i64)> = (0..sector.len())
            .into_par_iter()
            .map(|i| {
                let mut best: Option<(Vec<u32>, i64)> = None;
                for g in group {
                    let (s, w) = g.apply_wedge(sector.wedge(i));
                    match &mut best {
                        Some((b, c)) if *b == w => *c += s,
                        Some((b, _)) if *b < w => {}
                        _ => best = Some((w, s)),
                    }
                }
                let (w, c) = best.expect("the group contains the identity");
                (sector.position(&w).expect("the group preserves the sector"), c)
            })
            .collect();
        let mut index = vec![u32::MAX; sector.len()];
        let mut reps = Vec::new();
        for (i, &(lead, c)) in leaders.iter().enumerate() {
            if lead == i && c != 0 {
                index[i] = reps.len() as u32;
                reps.push(i);
            }
        }
        let canon = leaders
            .iter()
            .map(|&(lead, c)| (c != 0).then(|| (index[lead], c.signum() as i8)))
            .collect();
        OrbitBasis { sector, reps, canon }
    }

    pub fn sector(&self) -> &SectorBasis {
        &self.sector
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Position in the sector of the `k`-th orbit representative.
    pub fn representative(&self, k: usize) -> usize {
        self.reps[k]
    }

    /// `Some((k, s))` when the orbit sum of wedge `v` is `s` times the
    /// `k`-th basis element.
    pub fn canonical(&self, v: usize) -> Option<(usize, i64)> {
        self.canon[v].map(|(k, s)| (k as usize, s as i64))
    }
}

/// Matrix of `d` between orbit bases: `d O(w) = Σ c · O(v)` over the terms
/// `c v` of `d w`, with each `O(v)` rewritten through its representative.
pub fn assemble_invariant_differential(from: &OrbitBasis, to: &OrbitBasis) -> Result<SparseExactMatrix, CeError> {
    let reps = from.sector.select(&from.reps);
    let columns = differential_columns(&reps, &to.sector)?;
    let reduced: Vec<Vec<(u32, i64)>> = columns
        .into_par_iter()
        .map(|col| {
            let mut acc: Vec<(u32, i64)> = col
                .into_iter()
                .filter_map(|(r, c)| to.canonical(r as usize).map(|(k, s)| (k as u32, c * s)))
                .collect();
            acc.sort_unstable_by_key(|e| e.0);
            let mut out: Vec<(u32, i64)> = Vec::with_capacity(acc.len());
            for (r, v) in acc {
                match out.last_mut() {
                    Some(last) if last.0 == r => last.1 += v,
                    _ => out.push((r, v)),
                }
            }
            out.retain(|e| e.1 != 0);
            out
        })
        .collect();
    Ok(SparseExactMatrix::from_integer_columns(to.len(), &reduced))
}
