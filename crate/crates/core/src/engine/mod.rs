//! Betti tables of the absolute, relative and sp(2n) complexes.
//!
//! Each differential is split into torus-charge blocks, every block is
//! ranked modulo several primes (and exactly when small), and the block
//! certificates are merged into per-degree rows.

mod representative;
mod table;

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::cache::{CacheError, MatrixCache, MatrixKey};
use crate::ce::{
    assemble_differential, assemble_invariant_differential, monomial_symmetries, relative_sector_in, CeError,
    GeneratorScope, GeneratorTable, OrbitBasis, RelativeSector, SectorBasis,
};
use crate::linalg::{
    primitive_integer_vector, rank_certified, LinalgError, RankCertificate, SparseExactMatrix, DEFAULT_EXACT_THRESHOLD,
    DEFAULT_PRIMES, FALLBACK_PRIME,
};
use crate::poisson::AlgebraSpec;

pub use representative::CocycleRepresentative;
pub use table::{BettiRow, BettiTable, ComplexKind};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Ce(#[from] CeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("sector (d={degree}, w={weight}) has {dim} cochains, over the budget of {limit}")]
    BudgetExceeded { degree: usize, weight: i64, dim: usize, limit: usize },
    #[error("empty cohomology at (d={degree}, w={weight})")]
    EmptyCohomology { degree: usize, weight: i64 },
    #[error("relative cochains are not closed under d at degree {0}")]
    NotSubcomplex(usize),
    #[error("rank certificate could not be established at degree {0}")]
    Uncertified(usize),
}

/// Which torus-charge blocks of each sector are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ChargeMode {
    /// Every block: dimensions and ranks of the whole sector.
    #[default]
    AllBlocks,
    /// Only charge zero. The Cartan torus acts trivially on cohomology, so
    /// Betti numbers are unchanged while the cochain dimensions shrink.
    ZeroChargeOnly,
    /// Charge zero, further restricted to cochains invariant under the
    /// monomial symplectic maps (quarter turns and index permutations).
    Symmetric,
}

impl ChargeMode {
    pub fn name(self) -> &'static str {
        match self {
            ChargeMode::AllBlocks => "all",
            ChargeMode::ZeroChargeOnly => "zero-charge",
            ChargeMode::Symmetric => "symmetric",
        }
    }

    pub fn is_torus_reduced(self) -> bool {
        self != ChargeMode::AllBlocks
    }
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub primes: Vec<u64>,
    pub exact_threshold: usize,
    pub charge_mode: ChargeMode,
    pub cache: Option<MatrixCache>,
    /// Refuse sectors with more cochains than this.
    pub max_sector_dim: Option<usize>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            primes: DEFAULT_PRIMES.to_vec(),
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            charge_mode: ChargeMode::AllBlocks,
            cache: None,
            max_sector_dim: None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Engine {
    config: EngineConfig,
}

/// Rank of one differential with its certificate; `certified` is false
/// when primes kept disagreeing.
#[derive(Clone, Debug)]
pub(crate) struct RankOutcome {
    pub(crate) cert: RankCertificate,
    pub(crate) certified: bool,
}

impl RankOutcome {
    fn zero() -> Self {
        RankOutcome { cert: RankCertificate::trivial(), certified: true }
    }

    fn merge(&mut self, other: &RankOutcome) {
        self.cert.merge(&other.cert);
        self.certified &= other.certified;
    }
}

impl Engine {
    pub fn new(config: EngineConfig) -> Self {
        Engine { config }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Absolute cohomology `H^d_(w)` for `d` in `degrees`.
    pub fn betti_table(
        &self,
        spec: AlgebraSpec,
        weight: i64,
        degrees: RangeInclusive<usize>,
        reduced: bool,
    ) -> Result<BettiTable, EngineError> {
        let table = Arc::new(GeneratorTable::for_cochain_weight(spec, weight));
        let mut out = self.run_complex(&table, GeneratorScope::All, weight, degrees)?;
        out.kind = ComplexKind::Absolute;
        out.torus_reduced = self.config.charge_mode.is_torus_reduced();
        out.symmetry_reduced = self.config.charge_mode == ChargeMode::Symmetric;
        if reduced {
            out.reduce();
        }
        Ok(out)
    }

    /// Cohomology of the sp(2n) Lie algebra, over all degrees.
    pub fn sp_cohomology(&self, spec: AlgebraSpec) -> Result<BettiTable, EngineError> {
        let table = Arc::new(GeneratorTable::new(spec, 0));
        let mut out = self.run_complex(&table, GeneratorScope::Symplectic, 0, 0..=spec.sp_dimension())?;
        out.kind = ComplexKind::Symplectic;
        out.torus_reduced = self.config.charge_mode.is_torus_reduced();
        out.symmetry_reduced = self.config.charge_mode == ChargeMode::Symmetric;
        Ok(out)
    }

    /// Relative cohomology `H^d_(w)(𝔥, sp(2n))` for `d` in `degrees`.
    pub fn betti_table_relative(
        &self,
        spec: AlgebraSpec,
        weight: i64,
        degrees: RangeInclusive<usize>,
        reduced: bool,
    ) -> Result<BettiTable, EngineError> {
        let (lo, hi) = (*degrees.start(), *degrees.end());
        let table = Arc::new(GeneratorTable::for_cochain_weight(spec, weight));
        let first = lo.saturating_sub(1);
        let sectors: Vec<RelativeSector> = (first..=hi + 1)
            .into_par_iter()
            .map(|d| relative_sector_in(&table, d, weight))
            .collect::<Result<_, _>>()?;
        for s in &sectors {
            self.check_budget(s.horizontal.degree(), weight, s.horizontal.len())?;
        }
        let outcomes: Vec<RankOutcome> = (first..=hi)
            .into_par_iter()
            .map(|d| self.relative_rank(&table, &sectors[d - first], &sectors[d + 1 - first], weight))
            .collect::<Result<_, _>>()?;
        let dims: Vec<usize> = sectors.iter().map(RelativeSector::dim).collect();
        let mut out = assemble_rows(spec, weight, lo, hi, first, &dims, &outcomes);
        out.kind = ComplexKind::Relative;
        if reduced {
            out.reduce();
        }
        Ok(out)
    }

    fn check_budget(&self, degree: usize, weight: i64, dim: usize) -> Result<(), EngineError> {
        match self.config.max_sector_dim {
            Some(limit) if dim > limit => Err(EngineError::BudgetExceeded { degree, weight, dim, limit }),
            _ => Ok(()),
        }
    }

    pub(crate) fn sector(&self, table: &Arc<GeneratorTable>, scope: GeneratorScope, degree: usize, weight: i64) -> SectorBasis {
        match self.config.charge_mode {
            ChargeMode::AllBlocks => SectorBasis::enumerate(table, scope, degree, weight, None),
            ChargeMode::ZeroChargeOnly | ChargeMode::Symmetric => {
                let zero = vec![0; table.spec().n()];
                SectorBasis::enumerate(table, scope, degree, weight, Some(&zero))
            }
        }
    }

    fn run_complex(
        &self,
        table: &Arc<GeneratorTable>,
        scope: GeneratorScope,
        weight: i64,
        degrees: RangeInclusive<usize>,
    ) -> Result<BettiTable, EngineError> {
        if self.config.charge_mode == ChargeMode::Symmetric {
            return self.run_invariant_complex(table, scope, weight, degrees);
        }
        let (lo, hi) = (*degrees.start(), *degrees.end());
        let first = lo.saturating_sub(1);
        let sectors: Vec<SectorBasis> = (first..=hi + 1)
            .into_par_iter()
            .map(|d| self.sector(table, scope, d, weight))
            .collect();
        for s in &sectors {
            self.check_budget(s.degree(), weight, s.len())?;
            log::debug!("sector d={} w={} dim={}", s.degree(), weight, s.len());
        }
        let outcomes: Vec<RankOutcome> = (first..=hi)
            .into_par_iter()
            .map(|d| self.differential_rank(&sectors[d - first], &sectors[d + 1 - first]))
            .collect::<Result<_, _>>()?;
        let dims: Vec<usize> = sectors.iter().map(SectorBasis::len).collect();
        Ok(assemble_rows(table.spec(), weight, lo, hi, first, &dims, &outcomes))
    }

    fn run_invariant_complex(
        &self,
        table: &Arc<GeneratorTable>,
        scope: GeneratorScope,
        weight: i64,
        degrees: RangeInclusive<usize>,
    ) -> Result<BettiTable, EngineError> {
        let (lo, hi) = (*degrees.start(), *degrees.end());
        let first = lo.saturating_sub(1);
        let group = monomial_symmetries(table);
        let mut bases = Vec::with_capacity(hi + 2 - first);
        for d in first..=hi + 1 {
            let sector = self.sector(table, scope, d, weight);
            self.check_budget(d, weight, sector.len())?;
            let basis = OrbitBasis::new(sector, &group);
            log::debug!("sector d={d} w={weight} dim={} invariant={}", basis.sector().len(), basis.len());
            bases.push(basis);
        }
        let mut outcomes = Vec::with_capacity(hi + 1 - first);
        for d in first..=hi {
            let (from, to) = (&bases[d - first], &bases[d + 1 - first]);
            if from.is_empty() || to.is_empty() {
                outcomes.push(RankOutcome::zero());
                continue;
            }
            let m = assemble_invariant_differential(from, to)?;
            log::debug!("invariant block d={d}: {}x{} nnz={}", m.rows(), m.cols(), m.nnz());
            outcomes.push(self.certify(&m)?);
        }
        let dims: Vec<usize> = bases.iter().map(OrbitBasis::len).collect();
        Ok(assemble_rows(table.spec(), weight, lo, hi, first, &dims, &outcomes))
    }

    /// Rank of `d: from → to`, block by block in charge order.
    fn differential_rank(&self, from: &SectorBasis, to: &SectorBasis) -> Result<RankOutcome, EngineError> {
        if from.is_empty() || to.is_empty() {
            return Ok(RankOutcome::zero());
        }
        let sources = from.split_by_charge();
        let mut targets = to.split_by_charge();
        let pairs: Vec<(SectorBasis, SectorBasis)> = sources
            .into_iter()
            .filter_map(|(c, s)| targets.remove(&c).map(|t| (s, t)))
            .collect();
        let outcomes: Vec<RankOutcome> = pairs
            .par_iter()
            .map(|(s, t)| {
                let m = self.block_matrix(s, t)?;
                log::debug!("block d={} charge={:?}: {}x{} nnz={}", s.degree(), s.charge(), m.rows(), m.cols(), m.nnz());
                self.certify(&m)
            })
            .collect::<Result<_, _>>()?;
        let mut total = RankOutcome::zero();
        for o in &outcomes {
            total.merge(o);
        }
        if !outcomes.is_empty() {
            total.cert.exact_confirmed = outcomes.iter().all(|o| o.cert.exact_confirmed);
        }
        Ok(total)
    }

    fn block_matrix(&self, from: &SectorBasis, to: &SectorBasis) -> Result<SparseExactMatrix, EngineError> {
        let Some(cache) = &self.config.cache else {
            return Ok(assemble_differential(from, to)?);
        };
        let key = MatrixKey::differential(from);
        if let Some(m) = cache.load(&key)? {
            if m.rows() == to.len() && m.cols() == from.len() {
                return Ok(m);
            }
        }
        let m = assemble_differential(from, to)?;
        cache.store(&key, &m)?;
        Ok(m)
    }

    /// Certified rank, retrying with the fallback prime on disagreement.
    pub(crate) fn certify(&self, m: &SparseExactMatrix) -> Result<RankOutcome, EngineError> {
        match rank_certified(m, &self.config.primes, self.config.exact_threshold) {
            Ok(cert) => Ok(RankOutcome { cert, certified: true }),
            Err(LinalgError::Disagreement { per_prime, .. }) => {
                log::warn!("prime disagreement {per_prime:?}; adding {FALLBACK_PRIME}");
                let mut primes = self.config.primes.clone();
                if !primes.contains(&FALLBACK_PRIME) {
                    primes.push(FALLBACK_PRIME);
                }
                match rank_certified(m, &primes, self.config.exact_threshold) {
                    Ok(cert) => Ok(RankOutcome { cert, certified: true }),
                    Err(LinalgError::Disagreement { per_prime, exact }) => {
                        let rank = exact.unwrap_or_else(|| per_prime.iter().map(|p| p.1).max().unwrap_or(0));
                        let cert = RankCertificate {
                            rank,
                            primes_used: per_prime.iter().map(|p| p.0).collect(),
                            per_prime: per_prime.iter().map(|p| p.1).collect(),
                            agreement: false,
                            exact_confirmed: false,
                        };
                        Ok(RankOutcome { cert, certified: false })
                    }
                    Err(e) => Err(e.into()),
                }
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Rank of `d` restricted to invariant cochains: the invariant basis
    /// is pushed through the charge-zero differential and must land in
    /// the horizontal wedges again.
    fn relative_rank(
        &self,
        table: &Arc<GeneratorTable>,
        from: &RelativeSector,
        to: &RelativeSector,
        weight: i64,
    ) -> Result<RankOutcome, EngineError> {
        if from.dim() == 0 || to.dim() == 0 {
            return Ok(RankOutcome::zero());
        }
        let image = relative_image(table, from, weight)?;
        let m = SparseExactMatrix::from_rational_triplets(
            to.horizontal.len(),
            from.dim(),
            image
                .into_iter()
                .enumerate()
                .flat_map(|(c, col)| col.into_iter().map(move |(r, v)| (r, c, BigRational::from_integer(v))))
                .collect(),
        )?;
        self.certify(&m)
    }
}

/// Images under `d` of the invariant basis of `from`, each scaled to a
/// primitive integer vector, as sparse columns over the horizontal wedges
/// of the next degree.
pub(crate) fn relative_image(
    table: &Arc<GeneratorTable>,
    from: &RelativeSector,
    weight: i64,
) -> Result<Vec<Vec<(usize, BigInt)>>, EngineError> {
    let degree = from.horizontal.degree();
    let zero = vec![0; table.spec().n()];
    let src = SectorBasis::enumerate(table, GeneratorScope::All, degree, weight, Some(&zero));
    let dst = SectorBasis::enumerate(table, GeneratorScope::All, degree + 1, weight, Some(&zero));
    let horizontal_next = SectorBasis::enumerate(table, GeneratorScope::Horizontal, degree + 1, weight, None);
    let d = assemble_differential(&src, &dst)?;
    let mut columns = Vec::with_capacity(from.dim());
    for v in &from.invariants {
        let mut local = vec![BigRational::zero(); src.len()];
        for (i, x) in v.iter().enumerate() {
            if !x.is_zero() {
                let pos = src.position(from.horizontal.wedge(i)).expect("invariants have charge zero");
                local[pos] = x.clone();
            }
        }
        let image = d.mul_vec(&local)?;
        let ints = primitive_integer_vector(&image);
        let mut col = BTreeMap::new();
        for (r, x) in ints.into_iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let wedge = dst.wedge(r);
            let pos = horizontal_next.position(wedge).ok_or(EngineError::NotSubcomplex(degree))?;
            col.insert(pos, x);
        }
        columns.push(col.into_iter().collect());
    }
    Ok(columns)
}

/// Rows `lo..=hi` from sector dimensions starting at degree `first` and
/// outgoing ranks of degrees `first..=hi`.
fn assemble_rows(
    spec: AlgebraSpec,
    weight: i64,
    lo: usize,
    hi: usize,
    first: usize,
    dims: &[usize],
    outcomes: &[RankOutcome],
) -> BettiTable {
    let rows = (lo..=hi)
        .map(|d| {
            let out = &outcomes[d - first];
            let incoming = if d == 0 { None } else { Some(&outcomes[d - 1 - first]) };
            let rank_in = incoming.map_or(0, |o| o.cert.rank);
            let certified = out.certified && incoming.is_none_or(|o| o.certified);
            let dim = dims[d - first];
            let betti = (certified && dim >= out.cert.rank + rank_in).then(|| dim - out.cert.rank - rank_in);
            BettiRow {
                degree: d,
                dim,
                rank_out: out.cert.rank,
                rank_in,
                betti,
                certified: certified && betti.is_some(),
                certificate: out.cert.clone(),
            }
        })
        .collect();
    BettiTable {
        spec,
        weight,
        reduced: false,
        kind: ComplexKind::Absolute,
        torus_reduced: false,
        symmetry_reduced: false,
        rows,
    }
}
