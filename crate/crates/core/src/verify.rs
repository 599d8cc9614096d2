//! Verification suites: computations diffed against expected values from
//! the claims file, either transcribed (`paper`) or produced by the
//! closed-form model at run time (`model`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{BettiTable, ChargeMode, Engine, EngineConfig, EngineError};
use crate::model::{GammaDegree, GkfModel};
use crate::poisson::AlgebraSpec;

/// The claims shipped with the crate.
pub const BUILTIN_CLAIMS: &str = include_str!("../data/claims.toml");

pub const CLAIMS_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("claims file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("claims file version {found}, expected {CLAIMS_VERSION}")]
    Version { found: u32 },
    #[error("claim {id}: {message}")]
    BadClaim { id: String, message: String },
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimSource {
    Paper,
    Model,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimKind {
    Absolute,
    Relative,
    Sp,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub suite: String,
    pub anchor: String,
    pub source: ClaimSource,
    pub kind: ClaimKind,
    pub n: usize,
    pub weight: i64,
    pub degrees: Vec<usize>,
    pub reduced: bool,
    #[serde(default)]
    pub expected: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimSet {
    pub version: u32,
    #[serde(rename = "claim")]
    pub claims: Vec<Claim>,
}

impl ClaimSet {
    pub fn parse(text: &str) -> Result<Self, VerifyError> {
        let set: ClaimSet = toml::from_str(text)?;
        if set.version != CLAIMS_VERSION {
            return Err(VerifyError::Version { found: set.version });
        }
        for c in &set.claims {
            let bad = |message: &str| VerifyError::BadClaim { id: c.id.clone(), message: message.to_string() };
            if c.degrees.is_empty() {
                return Err(bad("no degrees"));
            }
            match (c.source, &c.expected) {
                (ClaimSource::Paper, None) => return Err(bad("paper claims need `expected`")),
                (ClaimSource::Paper, Some(e)) if e.len() != c.degrees.len() => {
                    return Err(bad("`expected` and `degrees` differ in length"))
                }
                (ClaimSource::Model, Some(_)) => return Err(bad("model claims must not carry `expected`")),
                (ClaimSource::Model, None) if c.weight > 0 => return Err(bad("model covers non-positive weight only")),
                _ => {}
            }
        }
        Ok(set)
    }

    pub fn builtin() -> Self {
        ClaimSet::parse(BUILTIN_CLAIMS).expect("shipped claims file is valid")
    }

    pub fn load(path: &Path) -> Result<Self, VerifyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| VerifyError::Io { path: path.display().to_string(), source })?;
        ClaimSet::parse(&text)
    }

    pub fn for_suite<'a>(&'a self, suite: &'a str) -> impl Iterator<Item = &'a Claim> + 'a {
        self.claims.iter().filter(move |c| c.suite == suite)
    }
}

/// Resource limits; exceeding them skips rows, it never fails them.
#[derive(Clone, Debug, Default)]
pub struct Budget {
    pub max_sector_dim: Option<usize>,
    pub time_limit: Option<Duration>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub claim_id: String,
    pub anchor: String,
    pub source: ClaimSource,
    pub degrees: Vec<usize>,
    pub expected: Vec<Option<usize>>,
    pub computed: Vec<Option<usize>>,
    pub status: RowStatus,
    pub note: Option<String>,
    #[serde(skip)]
    pub runtime: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Overall {
    Pass,
    Fail,
    Incomplete,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub rows: Vec<ReportRow>,
}

impl VerificationReport {
    pub fn overall(&self) -> Overall {
        if self.rows.iter().any(|r| r.status == RowStatus::Fail) {
            Overall::Fail
        } else if self.rows.iter().any(|r| r.status == RowStatus::Skipped) {
            Overall::Incomplete
        } else {
            Overall::Pass
        }
    }

    pub fn passed(&self) -> bool {
        self.overall() == Overall::Pass
    }
}

fn render(values: &[Option<usize>], degrees: &[usize]) -> String {
    let parts: Vec<String> = degrees
        .iter()
        .zip(values)
        .map(|(d, v)| format!("{d}:{}", v.map_or_else(|| "?".to_string(), |b| b.to_string())))
        .collect();
    format!("{{{}}}", parts.join(" "))
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {}", self.suite)?;
        for r in &self.rows {
            let status = match r.status {
                RowStatus::Pass => "PASS",
                RowStatus::Fail => "FAIL",
                RowStatus::Skipped => "SKIP",
            };
            writeln!(f, "  {status} {} [{}]", r.claim_id, r.anchor)?;
            if r.status != RowStatus::Pass {
                writeln!(f, "    expected {}", render(&r.expected, &r.degrees))?;
                writeln!(f, "    computed {}", render(&r.computed, &r.degrees))?;
            }
            if let Some(note) = &r.note {
                writeln!(f, "    note: {note}")?;
            }
        }
        let overall = match self.overall() {
            Overall::Pass => "pass",
            Overall::Fail => "fail",
            Overall::Incomplete => "incomplete",
        };
        writeln!(f, "overall {overall}")
    }
}

pub trait VerificationSuite: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    /// Whether the `all` alias includes this suite.
    fn in_default(&self) -> bool {
        true
    }
    fn run(&self, claims: &ClaimSet, base: &EngineConfig, budget: &Budget) -> VerificationReport;
}

/// Runs every claim tagged with the suite's name.
pub struct ClaimSuite {
    name: &'static str,
    description: &'static str,
    default: bool,
    charge_mode: ChargeMode,
}

impl ClaimSuite {
    pub fn new(name: &'static str, description: &'static str) -> Self {
        ClaimSuite { name, description, default: true, charge_mode: ChargeMode::AllBlocks }
    }

    pub fn opt_in(mut self) -> Self {
        self.default = false;
        self
    }

    pub fn charge_mode(mut self, mode: ChargeMode) -> Self {
        self.charge_mode = mode;
        self
    }
}

impl VerificationSuite for ClaimSuite {
    fn name(&self) -> &'static str {
        self.name
    }

    fn description(&self) -> &'static str {
        self.description
    }

    fn in_default(&self) -> bool {
        self.default
    }

    fn run(&self, claims: &ClaimSet, base: &EngineConfig, budget: &Budget) -> VerificationReport {
        let mut config = base.clone();
        config.charge_mode = self.charge_mode;
        if budget.max_sector_dim.is_some() {
            config.max_sector_dim = budget.max_sector_dim;
        }
        let engine = Engine::new(config);
        let start = Instant::now();
        let rows = claims
            .for_suite(self.name)
            .map(|claim| {
                if budget.time_limit.is_some_and(|limit| start.elapsed() >= limit) {
                    return skipped(claim, "time budget exhausted".into(), Duration::ZERO);
                }
                evaluate(claim, &engine)
            })
            .collect();
        VerificationReport { suite: self.name.to_string(), rows }
    }
}

fn skipped(claim: &Claim, note: String, runtime: Duration) -> ReportRow {
    ReportRow {
        claim_id: claim.id.clone(),
        anchor: claim.anchor.clone(),
        source: claim.source,
        degrees: claim.degrees.clone(),
        expected: claim.expected.clone().map_or_else(|| vec![None; claim.degrees.len()], |e| e.into_iter().map(Some).collect()),
        computed: vec![None; claim.degrees.len()],
        status: RowStatus::Skipped,
        note: Some(note),
        runtime,
    }
}

/// Computes one claim and compares.
pub fn evaluate(claim: &Claim, engine: &Engine) -> ReportRow {
    let start = Instant::now();
    let spec = match AlgebraSpec::new(claim.n) {
        Ok(s) => s,
        Err(e) => return failed(claim, e.to_string(), start.elapsed()),
    };
    let lo = *claim.degrees.iter().min().expect("validated non-empty");
    let hi = *claim.degrees.iter().max().expect("validated non-empty");
    let computed = match claim.kind {
        ClaimKind::Absolute => engine.betti_table(spec, claim.weight, lo..=hi, claim.reduced),
        ClaimKind::Relative => engine.betti_table_relative(spec, claim.weight, lo..=hi, claim.reduced),
        ClaimKind::Sp => engine.sp_cohomology(spec),
    };
    let table = match computed {
        Ok(t) => t,
        Err(EngineError::BudgetExceeded { degree, dim, limit, .. }) => {
            return skipped(claim, format!("sector d={degree} has {dim} cochains, budget {limit}"), start.elapsed())
        }
        Err(e) => return failed(claim, e.to_string(), start.elapsed()),
    };
    let expected: Vec<Option<usize>> = match (&claim.expected, claim.source) {
        (Some(e), _) => e.iter().copied().map(Some).collect(),
        (None, _) => match model_values(claim, spec, lo, hi) {
            Ok(v) => v,
            Err(e) => return failed(claim, e, start.elapsed()),
        },
    };
    let computed: Vec<Option<usize>> = claim
        .degrees
        .iter()
        .map(|&d| match claim.kind {
            // sp(2n) has no cochains past its dimension.
            ClaimKind::Sp if table.row(d).is_none() => Some(0),
            _ => table.betti(d),
        })
        .collect();
    let mut note = table.check_invariants().err();
    if !table.is_certified() {
        note.get_or_insert_with(|| "uncertified rank".to_string());
    }
    let status = if note.is_none() && computed == expected { RowStatus::Pass } else { RowStatus::Fail };
    ReportRow {
        claim_id: claim.id.clone(),
        anchor: claim.anchor.clone(),
        source: claim.source,
        degrees: claim.degrees.clone(),
        expected,
        computed,
        status,
        note,
        runtime: start.elapsed(),
    }
}

fn model_values(claim: &Claim, spec: AlgebraSpec, lo: usize, hi: usize) -> Result<Vec<Option<usize>>, String> {
    let model = GkfModel::new(spec, GammaDegree::default());
    let table: BettiTable = match claim.kind {
        ClaimKind::Absolute => model.predicted_betti(claim.weight, lo..=hi, claim.reduced),
        ClaimKind::Relative => model.predicted_relative_betti(claim.weight, lo..=hi, claim.reduced),
        ClaimKind::Sp => return Err("the model does not describe sp(2n) alone".into()),
    }
    .map_err(|e| e.to_string())?;
    Ok(claim.degrees.iter().map(|&d| table.betti(d)).collect())
}

fn failed(claim: &Claim, note: String, runtime: Duration) -> ReportRow {
    ReportRow { status: RowStatus::Fail, ..skipped(claim, note, runtime) }
}

pub struct SuiteRegistry {
    suites: BTreeMap<&'static str, Box<dyn VerificationSuite>>,
}

impl SuiteRegistry {
    pub fn empty() -> Self {
        SuiteRegistry { suites: BTreeMap::new() }
    }

    pub fn builtin() -> Self {
        let mut r = SuiteRegistry::empty();
        r.register(Box::new(ClaimSuite::new("gkf-n1", "n=1 weights 0 and -2 against the model")));
        r.register(Box::new(ClaimSuite::new("vanishing-n1", "n=1 weight-0 vanishing degrees")));
        r.register(Box::new(ClaimSuite::new("odd-weight-n1", "n=1 odd weights carry no cohomology")));
        r.register(Box::new(ClaimSuite::new("relative-n1", "n=1 cohomology relative to sp(2)")));
        r.register(Box::new(ClaimSuite::new("sp-small", "cohomology of sp(2) and sp(4)")));
        r.register(Box::new(
            ClaimSuite::new("vanishing-n2-stretch", "n=2 weight-0 vanishing degrees (long)")
                .opt_in()
                .charge_mode(ChargeMode::Symmetric),
        ));
        r
    }

    pub fn register(&mut self, suite: Box<dyn VerificationSuite>) {
        self.suites.insert(suite.name(), suite);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.suites.keys().copied()
    }

    pub fn get(&self, name: &str) -> Option<&dyn VerificationSuite> {
        self.suites.get(name).map(|s| s.as_ref())
    }

    /// A suite by name, or every default suite for `all`.
    pub fn resolve(&self, name: &str) -> Result<Vec<&dyn VerificationSuite>, VerifyError> {
        if name == "all" {
            return Ok(self.suites.values().filter(|s| s.in_default()).map(|s| s.as_ref()).collect());
        }
        self.get(name).map(|s| vec![s]).ok_or_else(|| VerifyError::UnknownSuite(name.to_string()))
    }
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        SuiteRegistry::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_claims_parse() {
        let set = ClaimSet::builtin();
        let registry = SuiteRegistry::builtin();
        for c in &set.claims {
            assert!(registry.get(&c.suite).is_some(), "{} names unknown suite {}", c.id, c.suite);
        }
    }

    #[test]
    fn all_excludes_stretch() {
        let r = SuiteRegistry::builtin();
        let names: Vec<&str> = r.resolve("all").unwrap().iter().map(|s| s.name()).collect();
        assert_eq!(names, ["gkf-n1", "odd-weight-n1", "relative-n1", "sp-small", "vanishing-n1"]);
        assert!(r.resolve("vanishing-n2-stretch").is_ok());
        assert!(matches!(r.resolve("bogus"), Err(VerifyError::UnknownSuite(_))));
    }

    #[test]
    fn malformed_claims_rejected() {
        let text = "version = 1\n[[claim]]\nid='x'\nsuite='s'\nanchor='a'\nsource='paper'\nkind='absolute'\nn=1\nweight=0\ndegrees=[1,2]\nreduced=true\nexpected=[0]\n";
        assert!(matches!(ClaimSet::parse(text), Err(VerifyError::BadClaim { .. })));
        assert!(matches!(ClaimSet::parse("version = 2\nclaim = []\n"), Err(VerifyError::Version { found: 2 })));
    }

    #[test]
    fn budget_skips_rather_than_fails() {
        let set = ClaimSet::builtin();
        let suite = SuiteRegistry::builtin();
        let budget = Budget { max_sector_dim: Some(5), time_limit: None };
        let report = suite.get("vanishing-n1").unwrap().run(&set, &EngineConfig::default(), &budget);
        assert_eq!(report.overall(), Overall::Incomplete);
        assert!(report.rows.iter().all(|r| r.status == RowStatus::Skipped));
    }
}
