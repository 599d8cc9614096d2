use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use super::assemble::assemble_sp_action_between;
use super::generators::GeneratorTable;
use super::sector::{GeneratorScope, SectorBasis};
use super::CeError;
use crate::linalg::{kernel_basis_exact, SparseExactMatrix};
use crate::poisson::sp_basis;

/// Relative cochains `C^d(𝔥, sp(2n))` of one weight: sp(2n)-invariant
/// combinations of horizontal wedges.
#[derive(Clone, Debug)]
pub struct RelativeSector {
    /// All horizontal wedges of the sector.
    pub horizontal: SectorBasis,
    /// Basis of the invariants, as exact vectors over `horizontal`.
    pub invariants: Vec<Vec<BigRational>>,
}

impl RelativeSector {
    pub fn dim(&self) -> usize {
        self.invariants.len()
    }

    /// The invariants as columns of a `horizontal.len() × dim` matrix.
    pub fn invariant_matrix(&self) -> SparseExactMatrix {
        let entries = self
            .invariants
            .iter()
            .enumerate()
            .flat_map(|(c, v)| v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(move |(r, x)| (r, c, x.clone())))
            .collect();
        SparseExactMatrix::from_rational_triplets(self.horizontal.len(), self.invariants.len(), entries)
            .expect("kernel vectors are well formed")
    }
}

/// Builds the relative sector of `(degree, weight)` over `table`.
///
/// Invariance under the torus `p_i q_i` forces charge zero, so the
/// remaining sp(2n) equations are solved exactly on the charge-zero
/// horizontal wedges only and the solutions embedded back.
pub fn relative_sector_in(
    table: &Arc<GeneratorTable>,
    degree: usize,
    weight: i64,
) -> Result<RelativeSector, CeError> {
    let spec = table.spec();
    let horizontal = SectorBasis::enumerate(table, GeneratorScope::Horizontal, degree, weight, None);
    let zero = vec![0; spec.n()];
    let neutral = horizontal.restrict_to_charge(&zero);
    let mut equations: Vec<(usize, usize, BigRational)> = Vec::new();
    let mut row_offset = 0;
    for h in sp_basis(spec) {
        let action = assemble_sp_action_between(&neutral, &horizontal, &h)?;
        for (r, c, v) in action.rational_entries().expect("rational action") {
            equations.push((row_offset + r, c, v));
        }
        row_offset += action.rows();
    }
    let system = SparseExactMatrix::from_rational_triplets(row_offset, neutral.len(), equations)?;
    let local = kernel_basis_exact(&system, usize::MAX)?;
    let embed: Vec<usize> = neutral
        .iter()
        .map(|w| horizontal.position(w).expect("sub-basis"))
        .collect();
    let invariants = local
        .into_iter()
        .map(|v| {
            let mut full = vec![BigRational::zero(); horizontal.len()];
            for (i, x) in v.into_iter().enumerate() {
                full[embed[i]] = x;
            }
            full
        })
        .collect();
    Ok(RelativeSector { horizontal, invariants })
}
