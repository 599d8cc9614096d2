//! The weight-graded Chevalley–Eilenberg cochain complex of 𝔥₂ₙ.
//!
//! A cochain of degree `d` is a combination of wedges of `d` distinct dual
//! generators `ξ_m`; its weight is the sum of the monomial weights, so a
//! weight-`w` cochain only pairs with arguments of total weight `w`. The
//! differential preserves both weight and the torus charge, which splits
//! every sector into independent blocks.

mod assemble;
mod generators;
mod relative;
mod sector;
mod symmetry;

use std::sync::Arc;

use thiserror::Error;

pub use assemble::{assemble_differential, assemble_differential_in, assemble_sp_action};
pub use generators::{CoBracketTerm, GeneratorTable, MONOMIAL_ORDER_VERSION};
pub use relative::{relative_sector_in, RelativeSector};
pub use sector::{GeneratorScope, SectorBasis, WedgeMonomial};
pub use symmetry::{assemble_invariant_differential, monomial_symmetries, OrbitBasis, SignedPermutation};

use crate::linalg::LinalgError;
use crate::poisson::AlgebraSpec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CeError {
    #[error("sector bases belong to different algebras")]
    SpecMismatch,
    #[error("sector weights differ: {from} vs {to}")]
    WeightMismatch { from: i64, to: i64 },
    #[error("sector degrees {from} -> {to} are not consecutive")]
    DegreeMismatch { from: usize, to: usize },
    #[error("image wedge {wedge:?} is missing from the degree-{degree} target basis")]
    MissingTarget { degree: usize, wedge: Vec<u32> },
    #[error("sp(2n) action needs a quadratic monomial, got {0}")]
    NotQuadratic(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The `(degree, weight)` sector of the full cochain complex.
pub fn enumerate_sector(spec: AlgebraSpec, degree: usize, weight: i64) -> SectorBasis {
    let table = Arc::new(GeneratorTable::for_cochain_weight(spec, weight));
    SectorBasis::enumerate(&table, GeneratorScope::All, degree, weight, None)
}

/// The relative sector of `(degree, weight)`: horizontal wedges and the
/// exact basis of their sp(2n)-invariant combinations.
pub fn relative_sector(spec: AlgebraSpec, degree: usize, weight: i64) -> Result<RelativeSector, CeError> {
    let table = Arc::new(GeneratorTable::for_cochain_weight(spec, weight));
    relative_sector_in(&table, degree, weight)
}

/// Largest degree with a nonempty weight-`w` sector (`None` if all are empty).
///
/// At most 2n linear generators carry negative weight, every quadratic is
/// free, and the positive part must balance the linears.
pub fn top_degree(spec: AlgebraSpec, weight: i64) -> Option<usize> {
    let table = Arc::new(GeneratorTable::for_cochain_weight(spec, weight));
    let bound = 2 * spec.n() + spec.sp_dimension() + (weight + 2 * spec.n() as i64).max(0) as usize;
    (0..=bound)
        .rev()
        .find(|&d| !SectorBasis::enumerate(&table, GeneratorScope::All, d, weight, None).is_empty())
}
