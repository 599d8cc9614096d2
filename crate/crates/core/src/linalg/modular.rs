//! Sparse Gaussian elimination over word-sized prime fields.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::matrix::inv_mod;
use super::{LinalgError, SparseExactMatrix};

/// Rank of `m` reduced modulo `p`.
pub fn rank_mod_p(m: &SparseExactMatrix, p: u64) -> Result<usize, LinalgError> {
    let reduced;
    let (modulus, entries) = match m.residue_triplets() {
        Some(t) => t,
        None => {
            reduced = m.reduce_mod(p)?;
            reduced.residue_triplets().expect("just reduced")
        }
    };
    if modulus != p {
        return Err(LinalgError::FieldMismatch { expected: p, found: modulus });
    }
    if entries.is_empty() {
        return Ok(0);
    }
    // Eliminate along the shorter side: at most min(rows, cols) pivots, and
    // every vector that reduces to zero is wasted work.
    let by_rows = m.rows() <= m.cols();
    let (count, len) = if by_rows { (m.rows(), m.cols()) } else { (m.cols(), m.rows()) };
    let mut vectors: Vec<Vec<(u32, u32)>> = vec![Vec::new(); count];
    for &(r, c, v) in entries {
        let (owner, coord) = if by_rows { (r, c) } else { (c, r) };
        vectors[owner as usize].push((coord, v));
    }
    Ok(rank_of_vectors(vectors, len, p))
}

/// Rank of a family of sparse vectors of length `len` over GF(p).
///
/// Coordinates are relabelled so the rarest coordinates come first, and
/// vectors are inserted sparsest first. Each vector is reduced against the
/// pivot rows found so far, in increasing coordinate order, using a dense
/// accumulator and a heap of live positions; the leading survivor becomes
/// a new pivot. Choosing rare coordinates as pivots keeps fill low.
pub(crate) fn rank_of_vectors(mut vectors: Vec<Vec<(u32, u32)>>, len: usize, p: u64) -> usize {
    vectors.retain(|v| !v.is_empty());
    if vectors.is_empty() {
        return 0;
    }
    let mut freq = vec![0u32; len];
    for v in &vectors {
        for &(c, _) in v {
            freq[c as usize] += 1;
        }
    }
    let mut order: Vec<u32> = (0..len as u32).collect();
    order.sort_by_key(|&c| (freq[c as usize], c));
    let mut relabel = vec![0u32; len];
    for (pos, &c) in order.iter().enumerate() {
        relabel[c as usize] = pos as u32;
    }
    for v in vectors.iter_mut() {
        for e in v.iter_mut() {
            e.0 = relabel[e.0 as usize];
        }
        v.sort_unstable_by_key(|e| e.0);
    }
    vectors.sort_by_key(|v| v.len());

    let max_rank = vectors.len().min(len);
    let mut pivots: Vec<Option<Box<[(u32, u32)]>>> = vec![None; len];
    let mut acc = vec![0u64; len];
    let mut queued = vec![false; len];
    let mut heap: BinaryHeap<Reverse<u32>> = BinaryHeap::new();
    let mut rank = 0;

    for v in vectors {
        for &(c, x) in &v {
            acc[c as usize] = x as u64;
            queued[c as usize] = true;
            heap.push(Reverse(c));
        }
        while let Some(Reverse(pos)) = heap.pop() {
            let pu = pos as usize;
            queued[pu] = false;
            let a = acc[pu];
            if a == 0 {
                continue;
            }
            acc[pu] = 0;
            match &pivots[pu] {
                Some(row) => {
                    let f = p - a;
                    for &(q, c) in row.iter() {
                        let qu = q as usize;
                        acc[qu] = (acc[qu] + f * c as u64) % p;
                        if !queued[qu] {
                            queued[qu] = true;
                            heap.push(Reverse(q));
                        }
                    }
                }
                None => {
                    let inv = inv_mod(a, p);
                    let mut rest = Vec::with_capacity(heap.len());
                    while let Some(Reverse(q)) = heap.pop() {
                        let qu = q as usize;
                        queued[qu] = false;
                        if acc[qu] != 0 {
                            rest.push((q, (acc[qu] * inv % p) as u32));
                            acc[qu] = 0;
                        }
                    }
                    pivots[pu] = Some(rest.into_boxed_slice());
                    rank += 1;
                    break;
                }
            }
        }
        if rank == max_rank {
            break;
        }
    }
    rank
}
