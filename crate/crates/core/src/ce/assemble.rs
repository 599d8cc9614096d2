use rayon::prelude::*;

use super::sector::{GeneratorScope, SectorBasis};
use super::CeError;
use crate::linalg::{Field, SparseExactMatrix};
use crate::poisson::Monomial;

/// Sign of the permutation sorting `rest[..j] ++ [a, b] ++ rest[j..]`,
/// where `rest` is sorted; `None` if `a` or `b` already occurs in `rest`.
fn insertion_sign(rest: &[u32], j: usize, a: u32, b: u32) -> Option<(i64, Vec<u32>)> {
    let mut inversions = 0usize;
    for (i, &x) in rest.iter().enumerate() {
        if x == a || x == b {
            return None;
        }
        if i < j {
            inversions += (x > a) as usize + (x > b) as usize;
        } else {
            inversions += (x < a) as usize + (x < b) as usize;
        }
    }
    if a > b {
        inversions += 1;
    }
    let mut out = Vec::with_capacity(rest.len() + 2);
    out.extend_from_slice(rest);
    let pa = out.partition_point(|&x| x < a);
    out.insert(pa, a);
    let pb = out.partition_point(|&x| x < b);
    out.insert(pb, b);
    Some((if inversions % 2 == 0 { 1 } else { -1 }, out))
}

fn check_pair(from: &SectorBasis, to: &SectorBasis, degree_step: usize) -> Result<(), CeError> {
    if from.spec() != to.spec() {
        return Err(CeError::SpecMismatch);
    }
    if from.weight() != to.weight() {
        return Err(CeError::WeightMismatch { from: from.weight(), to: to.weight() });
    }
    if to.degree() != from.degree() + degree_step {
        return Err(CeError::DegreeMismatch { from: from.degree(), to: to.degree() });
    }
    Ok(())
}

/// Integer columns of the differential `C^d → C^{d+1}`.
///
/// On a dual generator `dξ_m = −Σ_{a<b} c^m_{ab} ξ_a ∧ ξ_b`, extended as a
/// graded derivation: the term replacing position `j` carries `(−1)^j`
/// and the sign of re-sorting the wedge. A source of `Symplectic` scope
/// only keeps bracket pairs inside sp(2n).
pub(crate) fn differential_columns(
    from: &SectorBasis,
    to: &SectorBasis,
) -> Result<Vec<Vec<(u32, i64)>>, CeError> {
    check_pair(from, to, 1)?;
    let table = from.table();
    let symplectic = from.scope() == GeneratorScope::Symplectic;
    (0..from.len())
        .into_par_iter()
        .map(|col| {
            let wedge = from.wedge(col);
            let mut acc: Vec<(u32, i64)> = Vec::new();
            let mut rest = Vec::with_capacity(wedge.len());
            for (j, &g) in wedge.iter().enumerate() {
                rest.clear();
                rest.extend(wedge.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &x)| x));
                let position_sign = if j % 2 == 0 { 1 } else { -1 };
                for term in table.cobracket(g) {
                    if symplectic && !(table.is_quadratic(term.a) && table.is_quadratic(term.b)) {
                        continue;
                    }
                    let Some((sign, target)) = insertion_sign(&rest, j, term.a, term.b) else {
                        continue;
                    };
                    let row = to.position(&target).ok_or_else(|| CeError::MissingTarget {
                        degree: to.degree(),
                        wedge: target.clone(),
                    })?;
                    acc.push((row as u32, -position_sign * sign * term.coeff));
                }
            }
            Ok(consolidate(acc))
        })
        .collect()
}

fn consolidate(mut acc: Vec<(u32, i64)>) -> Vec<(u32, i64)> {
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
}

/// Matrix of the Chevalley–Eilenberg differential between consecutive
/// sectors of equal weight: columns follow `from`, rows follow `to`.
pub fn assemble_differential(from: &SectorBasis, to: &SectorBasis) -> Result<SparseExactMatrix, CeError> {
    assemble_differential_in(from, to, Field::Rational)
}

pub fn assemble_differential_in(
    from: &SectorBasis,
    to: &SectorBasis,
    field: Field,
) -> Result<SparseExactMatrix, CeError> {
    let columns = differential_columns(from, to)?;
    let m = SparseExactMatrix::from_integer_columns(to.len(), &columns);
    Ok(match field {
        Field::Rational => m,
        Field::Prime(p) => m.reduce_mod(p)?,
    })
}

/// Matrix of the coadjoint action `L_h` of a quadratic `h` on a sector.
///
/// `L_h` is a degree-0 derivation: each generator is replaced in place by
/// its image, then the wedge is re-sorted.
pub fn assemble_sp_action(basis: &SectorBasis, h: &Monomial) -> Result<SparseExactMatrix, CeError> {
    assemble_sp_action_between(basis, basis, h)
}

/// `L_h` from `basis` into a sector `target` of the same degree and weight
/// that contains its image (for example a sub-basis into the full basis).
pub(crate) fn assemble_sp_action_between(
    basis: &SectorBasis,
    target: &SectorBasis,
    h: &Monomial,
) -> Result<SparseExactMatrix, CeError> {
    check_pair(basis, target, 0)?;
    if !h.is_quadratic() {
        return Err(CeError::NotQuadratic(h.to_string()));
    }
    let table = basis.table();
    let hid = table.id_of(h).ok_or_else(|| CeError::NotQuadratic(h.to_string()))?;
    let action = table.coadjoint(hid);
    let columns: Vec<Vec<(u32, i64)>> = (0..basis.len())
        .into_par_iter()
        .map(|col| {
            let wedge = basis.wedge(col);
            let mut acc = Vec::new();
            for (j, &g) in wedge.iter().enumerate() {
                for &(image, c) in &action[g as usize] {
                    let mut w: Vec<u32> = wedge.to_vec();
                    w[j] = image;
                    let Some((sign, sorted)) = sort_with_sign(w) else { continue };
                    let row = target.position(&sorted).ok_or_else(|| CeError::MissingTarget {
                        degree: target.degree(),
                        wedge: sorted.clone(),
                    })?;
                    acc.push((row as u32, sign * c));
                }
            }
            Ok(consolidate(acc))
        })
        .collect::<Result<_, CeError>>()?;
    Ok(SparseExactMatrix::from_integer_columns(target.len(), &columns))
}

/// Sorts a wedge returning the permutation sign, or `None` on a repeat.
pub(crate) fn sort_with_sign(mut w: Vec<u32>) -> Option<(i64, Vec<u32>)> {
    let mut sign = 1;
    for i in 1..w.len() {
        let mut k = i;
        while k > 0 && w[k - 1] > w[k] {
            w.swap(k - 1, k);
            sign = -sign;
            k -= 1;
        }
        if k > 0 && w[k - 1] == w[k] {
            return None;
        }
    }
    if w.windows(2).any(|p| p[0] == p[1]) {
        return None;
    }
    Some((sign, w))
}
