//! Exact weight-graded Chevalley–Eilenberg cohomology of the Lie algebra
//! of formal Hamiltonian vector fields, with a closed-form model to check
//! the computations against.

pub mod cache;
pub mod ce;
pub mod engine;
pub mod linalg;
pub mod model;
pub mod poisson;
pub mod strategy;
pub mod verify;

pub use engine::{BettiRow, BettiTable, ChargeMode, ComplexKind, Engine, EngineConfig, EngineError};
pub use model::{anomaly_target, GammaDegree, GkfModel};
pub use poisson::{AlgebraSpec, Monomial, PoissonElement};
pub use strategy::{CohomologyMode, ComputeRequest, ModeRegistry};
pub use verify::{SuiteRegistry, VerificationReport, VerificationSuite};
