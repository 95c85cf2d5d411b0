//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by construction, verification and simulation routines.
#[derive(Debug, Error)]
pub enum CqaError {
    #[error("site count mismatch: {left} vs {right}")]
    SiteCountMismatch { left: usize, right: usize },

    #[error("site {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("{n} sites exceeds the {max}-site mask width", max = crate::pauli::MAX_SITES)]
    TooManySites { n: usize },

    #[error("dimension {dim} exceeds configured limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },

    #[error("invalid cycle: {0}")]
    InvalidCycle(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("supports overlap: {0}")]
    OverlappingSupports(String),

    #[error("empty variable subset")]
    EmptySubset,

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    #[error("parity system is infeasible (detected at constraint {row})")]
    InfeasibleSystem { row: usize },

    #[error("target magnetization {target} has the wrong parity or range for {n} sites")]
    ParityMismatch { n: usize, target: i64 },

    #[error("term is not a pure X string")]
    NonXString,

    #[error("vertex count mismatch: {left} vs {right}")]
    VertexCountMismatch { left: usize, right: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("operator does not preserve the sector: {0}")]
    ClosureFailure(String),

    #[error("ground state is degenerate (multiplicity {multiplicity})")]
    DegenerateGround { multiplicity: usize },

    #[error("prepared state lies outside the target sector (weight {weight:.6} inside)")]
    WrongSector { weight: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("eigensolver did not converge (residual {residual:.3e} after {iterations} iterations)")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("sector is empty")]
    EmptySector,

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid format: {0}")]
    InvalidFormat(String),
}

pub type Result<T> = std::result::Result<T, CqaError>;
