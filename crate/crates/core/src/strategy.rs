//! Computation modes, registered by name and chosen at run time.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use thiserror::Error;

use crate::cache::MatrixCache;
use crate::ce::top_degree;
use crate::engine::{BettiTable, ChargeMode, Engine, EngineConfig, EngineError};
use crate::linalg::{DEFAULT_EXACT_THRESHOLD, DEFAULT_PRIMES};
use crate::model::{anomaly_target, GammaDegree, GkfModel, ModelError};
use crate::poisson::AlgebraSpec;

#[derive(Debug, Error)]
pub enum ModeError {
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("unknown mode {0:?}")]
    UnknownMode(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Everything a mode needs; weights are in the diagonal convention.
#[derive(Clone, Debug)]
pub struct ComputeRequest {
    pub n: usize,
    pub weights: Vec<i64>,
    /// `None` means every degree of the (finite) sector.
    pub degrees: Option<RangeInclusive<usize>>,
    pub reduced: bool,
    /// Extra real dimensions of the anomaly sector.
    pub m: Option<usize>,
    pub gamma: GammaDegree,
    pub primes: Vec<u64>,
    pub exact_threshold: usize,
    pub charge_mode: ChargeMode,
    pub cache_dir: Option<PathBuf>,
    pub max_sector_dim: Option<usize>,
}

impl ComputeRequest {
    pub fn new(n: usize) -> Self {
        ComputeRequest {
            n,
            weights: Vec::new(),
            degrees: None,
            reduced: false,
            m: None,
            gamma: GammaDegree::default(),
            primes: DEFAULT_PRIMES.to_vec(),
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            charge_mode: ChargeMode::AllBlocks,
            cache_dir: None,
            max_sector_dim: None,
        }
    }

    pub fn spec(&self) -> Result<AlgebraSpec, ModeError> {
        AlgebraSpec::new(self.n).map_err(|e| ModeError::Invalid(e.to_string()))
    }

    pub fn engine(&self) -> Result<Engine, ModeError> {
        let cache = match &self.cache_dir {
            Some(dir) => Some(MatrixCache::new(dir).map_err(EngineError::from)?),
            None => None,
        };
        Ok(Engine::new(EngineConfig {
            primes: self.primes.clone(),
            exact_threshold: self.exact_threshold,
            charge_mode: self.charge_mode,
            cache,
            max_sector_dim: self.max_sector_dim,
        }))
    }

    fn check_common(&self) -> Result<(), ModeError> {
        self.spec()?;
        if let Some(r) = &self.degrees {
            if r.is_empty() {
                return Err(ModeError::Invalid(format!("empty degree range {}..{}", r.start(), r.end())));
            }
        }
        if self.primes.len() < 2 {
            return Err(ModeError::Invalid("at least two primes are required".into()));
        }
        if let Some(p) = self.primes.iter().find(|&&p| !crate::linalg::is_word_prime(p)) {
            return Err(ModeError::Invalid(format!("{p} is not a prime below 2^32")));
        }
        Ok(())
    }

    fn require_weights(&self) -> Result<(), ModeError> {
        if self.weights.is_empty() {
            return Err(ModeError::Invalid("at least one --weight is required".into()));
        }
        Ok(())
    }

    fn range_or(&self, full: usize) -> RangeInclusive<usize> {
        self.degrees.clone().unwrap_or(0..=full)
    }
}

pub trait CohomologyMode: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// Checks parameter completeness before any work starts.
    fn validate(&self, req: &ComputeRequest) -> Result<(), ModeError>;
    /// One table per requested weight, in request order.
    fn compute(&self, req: &ComputeRequest) -> Result<Vec<BettiTable>, ModeError>;
}

struct Absolute;
struct Relative;
struct Symplectic;
struct Model;
struct AnomalyCheck;

impl CohomologyMode for Absolute {
    fn name(&self) -> &'static str {
        "absolute"
    }

    fn description(&self) -> &'static str {
        "cohomology of the full cochain complex"
    }

    fn validate(&self, req: &ComputeRequest) -> Result<(), ModeError> {
        req.check_common()?;
        req.require_weights()
    }

    fn compute(&self, req: &ComputeRequest) -> Result<Vec<BettiTable>, ModeError> {
        let spec = req.spec()?;
        let engine = req.engine()?;
        req.weights
            .iter()
            .map(|&w| {
                let range = req.range_or(top_degree(spec, w).unwrap_or(0));
                Ok(engine.betti_table(spec, w, range, req.reduced)?)
            })
            .collect()
    }
}

impl CohomologyMode for Relative {
    fn name(&self) -> &'static str {
        "relative"
    }

    fn description(&self) -> &'static str {
        "cohomology relative to sp(2n)"
    }

    fn validate(&self, req: &ComputeRequest) -> Result<(), ModeError> {
        req.check_common()?;
        req.require_weights()
    }

    fn compute(&self, req: &ComputeRequest) -> Result<Vec<BettiTable>, ModeError> {
        let spec = req.spec()?;
        let engine = req.engine()?;
        req.weights
            .iter()
            .map(|&w| {
                let range = req.range_or(top_degree(spec, w).unwrap_or(0));
                Ok(engine.betti_table_relative(spec, w, range, req.reduced)?)
            })
            .collect()
    }
}

impl CohomologyMode for Symplectic {
    fn name(&self) -> &'static str {
        "sp"
    }

    fn description(&self) -> &'static str {
        "cohomology of sp(2n) itself"
    }

    fn validate(&self, req: &ComputeRequest) -> Result<(), ModeError> {
        req.check_common()?;
        if req.weights.iter().any(|&w| w != 0) {
            return Err(ModeError::Invalid("sp(2n) cochains all have weight 0".into()));
        }
        Ok(())
    }

    fn compute(&self, req: &ComputeRequest) -> Result<Vec<BettiTable>, ModeError> {
        let spec = req.spec()?;
        let mut table = req.engine()?.sp_cohomology(spec)?;
        if let Some(r) = &req.degrees {
            table.rows.retain(|row| r.contains(&row.degree));
        }
        Ok(vec![table])
    }
}

impl CohomologyMode for Model {
    fn name(&self) -> &'static str {
        "model"
    }

    fn description(&self) -> &'static str {
        "prediction of the closed-form model (non-positive weights)"
    }

    fn validate(&self, req: &ComputeRequest) -> Result<(), ModeError> {
        req.check_common()?;
        req.require_weights()?;
        if let Some(&w) = req.weights.iter().find(|&&w| w > 0) {
            return Err(ModelError::PositiveWeight(w).into());
        }
        Ok(())
    }

    fn compute(&self, req: &ComputeRequest) -> Result<Vec<BettiTable>, ModeError> {
        let model = GkfModel::new(req.spec()?, req.gamma);
        let range = req.range_or(model.top_degree());
        req.weights
            .iter()
            .map(|&w| Ok(model.predicted_betti(w, range.clone(), req.reduced)?))
            .collect()
    }
}

impl CohomologyMode for AnomalyCheck {
    fn name(&self) -> &'static str {
        "anomaly-check"
    }

    fn description(&self) -> &'static str {
        "direct and model cohomology in the anomaly sector (4n+m+1, 0)"
    }

    fn validate(&self, req: &ComputeRequest) -> Result<(), ModeError> {
        req.check_common()?;
        if req.m.is_none() {
            return Err(ModeError::Invalid("anomaly-check needs --m".into()));
        }
        Ok(())
    }

    /// Returns the direct table then the model table, both at the target degree.
    fn compute(&self, req: &ComputeRequest) -> Result<Vec<BettiTable>, ModeError> {
        let spec = req.spec()?;
        let (degree, weight) = anomaly_target(req.n, req.m.unwrap_or(0));
        let direct = req.engine()?.betti_table(spec, weight, degree..=degree, true)?;
        let model = GkfModel::new(spec, req.gamma).predicted_betti(weight, degree..=degree, true)?;
        Ok(vec![direct, model])
    }
}

/// Modes by name.
pub struct ModeRegistry {
    modes: BTreeMap<&'static str, Box<dyn CohomologyMode>>,
}

impl ModeRegistry {
    pub fn empty() -> Self {
        ModeRegistry { modes: BTreeMap::new() }
    }

    pub fn builtin() -> Self {
        let mut r = ModeRegistry::empty();
        r.register(Box::new(Absolute));
        r.register(Box::new(Relative));
        r.register(Box::new(Symplectic));
        r.register(Box::new(Model));
        r.register(Box::new(AnomalyCheck));
        r
    }

    pub fn register(&mut self, mode: Box<dyn CohomologyMode>) {
        self.modes.insert(mode.name(), mode);
    }

    pub fn get(&self, name: &str) -> Result<&dyn CohomologyMode, ModeError> {
        self.modes.get(name).map(|m| m.as_ref()).ok_or_else(|| ModeError::UnknownMode(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.modes.keys().copied()
    }

    /// Validates then computes.
    pub fn run(&self, name: &str, req: &ComputeRequest) -> Result<Vec<BettiTable>, ModeError> {
        let mode = self.get(name)?;
        mode.validate(req)?;
        mode.compute(req)
    }
}

impl Default for ModeRegistry {
    fn default() -> Self {
        ModeRegistry::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_names() {
        let r = ModeRegistry::builtin();
        assert_eq!(r.names().collect::<Vec<_>>(), ["absolute", "anomaly-check", "model", "relative", "sp"]);
        assert!(matches!(r.get("nope"), Err(ModeError::UnknownMode(_))));
    }

    #[test]
    fn validation_happens_first() {
        let r = ModeRegistry::builtin();
        let mut req = ComputeRequest::new(1);
        assert!(matches!(r.run("absolute", &req), Err(ModeError::Invalid(_))));
        req.weights = vec![2];
        assert!(matches!(r.run("model", &req), Err(ModeError::Model(ModelError::PositiveWeight(2)))));
        req.weights = vec![0];
        #[allow(clippy::reversed_empty_ranges)]
        {
            req.degrees = Some(5..=2);
        }
        assert!(matches!(r.run("absolute", &req), Err(ModeError::Invalid(_))));
        req.degrees = None;
        assert!(matches!(r.run("anomaly-check", &req), Err(ModeError::Invalid(_))));
    }

    #[test]
    fn anomaly_check_n1() {
        let mut req = ComputeRequest::new(1);
        req.m = Some(1);
        let tables = ModeRegistry::builtin().run("anomaly-check", &req).unwrap();
        assert_eq!(tables.len(), 2);
        assert_eq!(tables[0].betti(6), Some(0));
        assert_eq!(tables[1].betti(6), Some(0));
    }

    #[test]
    fn full_range_by_default() {
        let mut req = ComputeRequest::new(1);
        req.weights = vec![0];
        let t = &ModeRegistry::builtin().run("absolute", &req).unwrap()[0];
        assert_eq!(t.degrees(), 0..=7);
        assert!(t.is_closed_range());
    }
}
