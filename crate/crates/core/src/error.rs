use thiserror::Error;

use crate::game::AgentId;

/// Errors shared by the whole library.
#[derive(Debug, Error)]
pub enum FhgError {
    #[error("agent {0} is not a member of the coalition")]
    AgentNotInCoalition(AgentId),
    #[error("unknown agent {agent} (instance has {n} agents)")]
    UnknownAgent { agent: AgentId, n: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("not a matching: coalition of size {0}")]
    NotAMatching(usize),
    #[error("instance too large for {what}: n = {n} exceeds cap {cap}")]
    InstanceTooLarge { what: &'static str, n: usize, cap: usize },
    #[error("beta must be positive, got {0}")]
    InvalidBeta(String),
    #[error("irrevocability violation at arrival {t}: {reason}")]
    IrrevocabilityViolation { t: usize, reason: String },
    #[error("dissolution requested in strict mode at arrival {0}")]
    DissolutionInStrictMode(usize),
    #[error("more than one coalition dissolved at arrival {0}")]
    MultipleDissolutions(usize),
    #[error("k = {k} is not below n = {n}; every agent is in the sample phase")]
    KTooLargeForInstance { k: usize, n: usize },
    #[error("policy {0} produced a coalition of size above two")]
    NotMatchingValued(String),
    #[error("instance is not star shaped: {0}")]
    NotAStarShapedInstance(String),
    #[error("invalid star spec: {0}")]
    InvalidSpec(String),
    #[error("recursion and enumeration disagree: {0}")]
    RecursionEnumerationMismatch(String),
    #[error("invalid decision distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown algorithm id {0:?}")]
    UnknownAlgorithm(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl FhgError {
    /// True for errors raised by the engine when a policy breaks the online rules.
    pub fn is_engine_violation(&self) -> bool {
        matches!(
            self,
            FhgError::IrrevocabilityViolation { .. }
                | FhgError::DissolutionInStrictMode(_)
                | FhgError::MultipleDissolutions(_)
                | FhgError::NotMatchingValued(_)
                | FhgError::InvalidDistribution(_)
        )
    }
}

pub type Result<T, E = FhgError> = std::result::Result<T, E>;
