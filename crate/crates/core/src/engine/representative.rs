use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{relative_image, Engine, EngineError};
use crate::ce::{assemble_differential, relative_sector_in, GeneratorScope, GeneratorTable, SectorBasis, WedgeMonomial};
use crate::linalg::{kernel_basis_exact, primitive_integer_vector, rank_exact, LinalgError, SparseExactMatrix};
use crate::poisson::{AlgebraSpec, Monomial};

/// An explicit cocycle spanning a nonzero class, over the sector basis
/// (the horizontal wedges for a relative class).
#[derive(Clone, Debug)]
pub struct CocycleRepresentative {
    pub spec: AlgebraSpec,
    pub degree: usize,
    pub weight: i64,
    pub relative: bool,
    pub basis: Vec<WedgeMonomial>,
    /// Basis monomials, aligned with `basis`.
    pub monomials: Vec<Vec<Monomial>>,
    pub coefficients: Vec<BigRational>,
    /// Rank of the incoming differential, and of it with the cocycle appended.
    pub rank_in: usize,
    pub rank_with_rep: usize,
}

impl CocycleRepresentative {
    pub fn support(&self) -> impl Iterator<Item = (&BigRational, &[Monomial])> {
        self.coefficients
            .iter()
            .zip(&self.monomials)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, m)| (c, m.as_slice()))
    }
}

impl fmt::Display for CocycleRepresentative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, ms) in self.support() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let wedge: Vec<String> = ms.iter().map(|m| format!("x[{m}]")).collect();
            write!(f, "({c}) {}", wedge.join("^"))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn columns_to_matrix(rows: usize, columns: &[Vec<BigRational>]) -> Result<SparseExactMatrix, LinalgError> {
    let entries = columns
        .iter()
        .enumerate()
        .flat_map(|(c, v)| v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(move |(r, x)| (r, c, x.clone())))
        .collect();
    SparseExactMatrix::from_rational_triplets(rows, columns.len(), entries)
}

fn sparse_to_dense(rows: usize, col: &[(usize, BigInt)]) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); rows];
    for (r, x) in col {
        v[*r] = BigRational::from_integer(x.clone());
    }
    v
}

/// First kernel vector of `d_out` that raises the rank of `d_in` when
/// appended, scaled to a primitive integer vector.
fn first_class(
    d_out: &SparseExactMatrix,
    d_in: &SparseExactMatrix,
    threshold: usize,
) -> Result<Option<(Vec<BigRational>, usize, usize)>, EngineError> {
    let kernel = kernel_basis_exact(d_out, threshold)?;
    let base = rank_exact(d_in)?;
    for v in kernel {
        let v: Vec<BigRational> = primitive_integer_vector(&v).into_iter().map(BigRational::from_integer).collect();
        let with = rank_exact(&d_in.with_column(&v)?)?;
        if with > base {
            return Ok(Some((v, base, with)));
        }
    }
    Ok(None)
}

impl Engine {
    /// An exact cocycle whose class is nonzero in `H^degree_(weight)`.
    pub fn extract_representative(
        &self,
        spec: AlgebraSpec,
        degree: usize,
        weight: i64,
        relative: bool,
    ) -> Result<CocycleRepresentative, EngineError> {
        let threshold = self.config.exact_threshold;
        let table = Arc::new(GeneratorTable::for_cochain_weight(spec, weight));
        if relative {
            return self.relative_representative(&table, degree, weight);
        }
        let here = SectorBasis::enumerate(&table, GeneratorScope::All, degree, weight, None);
        let next = SectorBasis::enumerate(&table, GeneratorScope::All, degree + 1, weight, None);
        if here.len() > threshold {
            return Err(LinalgError::ThresholdExceeded { size: here.len(), threshold }.into());
        }
        let d_out = assemble_differential(&here, &next)?;
        let d_in = if degree == 0 {
            SparseExactMatrix::zeros(here.len(), 0)
        } else {
            let prev = SectorBasis::enumerate(&table, GeneratorScope::All, degree - 1, weight, None);
            assemble_differential(&prev, &here)?
        };
        let (coefficients, rank_in, rank_with_rep) =
            first_class(&d_out, &d_in, threshold)?.ok_or(EngineError::EmptyCohomology { degree, weight })?;
        Ok(CocycleRepresentative {
            spec,
            degree,
            weight,
            relative: false,
            monomials: (0..here.len()).map(|i| here.wedge_monomials(i).into_iter().cloned().collect()).collect(),
            basis: here.wedges(),
            coefficients,
            rank_in,
            rank_with_rep,
        })
    }

    fn relative_representative(
        &self,
        table: &Arc<GeneratorTable>,
        degree: usize,
        weight: i64,
    ) -> Result<CocycleRepresentative, EngineError> {
        let spec = table.spec();
        let threshold = self.config.exact_threshold;
        let here = relative_sector_in(table, degree, weight)?;
        if here.horizontal.len() > threshold {
            return Err(LinalgError::ThresholdExceeded { size: here.horizontal.len(), threshold }.into());
        }
        let next_len = SectorBasis::enumerate(table, GeneratorScope::Horizontal, degree + 1, weight, None).len();
        let out_cols: Vec<Vec<BigRational>> = relative_image(table, &here, weight)?
            .iter()
            .map(|c| sparse_to_dense(next_len, c))
            .collect();
        // d restricted to invariants, in invariant coordinates.
        let d_out = columns_to_matrix(next_len, &out_cols)?;
        let d_in = if degree == 0 {
            SparseExactMatrix::zeros(here.horizontal.len(), 0)
        } else {
            let prev = relative_sector_in(table, degree - 1, weight)?;
            let cols: Vec<Vec<BigRational>> = relative_image(table, &prev, weight)?
                .iter()
                .map(|c| sparse_to_dense(here.horizontal.len(), c))
                .collect();
            columns_to_matrix(here.horizontal.len(), &cols)?
        };
        let kernel = kernel_basis_exact(&d_out, threshold)?;
        let base = rank_exact(&d_in)?;
        for k in kernel {
            let mut v = vec![BigRational::zero(); here.horizontal.len()];
            for (coef, inv) in k.iter().zip(&here.invariants) {
                if coef.is_zero() {
                    continue;
                }
                for (slot, x) in v.iter_mut().zip(inv) {
                    *slot += coef * x;
                }
            }
            let v: Vec<BigRational> = primitive_integer_vector(&v).into_iter().map(BigRational::from_integer).collect();
            let with = rank_exact(&d_in.with_column(&v)?)?;
            if with > base {
                let h = &here.horizontal;
                return Ok(CocycleRepresentative {
                    spec,
                    degree,
                    weight,
                    relative: true,
                    monomials: (0..h.len()).map(|i| h.wedge_monomials(i).into_iter().cloned().collect()).collect(),
                    basis: h.wedges(),
                    coefficients: v,
                    rank_in: base,
                    rank_with_rep: with,
                });
            }
        }
        Err(EngineError::EmptyCohomology { degree, weight })
    }
}
