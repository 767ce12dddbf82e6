use crate::map::ResidueClass;
use crate::nat::Nat;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("the map is only defined for positive integers")]
    Zero,
    #[error("{value} is not in residue class {expected}")]
    WrongClass { value: Nat, expected: ResidueClass },
    #[error("orbit of {start} did not settle within {budget} steps")]
    Inconclusive { start: Nat, budget: u64 },
    #[error("rule sequence must contain at least one rule")]
    EmptySequence,
    #[error("cycle search length {requested} exceeds the limit of {limit}")]
    SearchTooLong { requested: u32, limit: u32 },
    #[error("tree construction needs a finite depth or value cap")]
    Unbounded,
    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: u64, hi: u64 },
    #[error("step budget {0} is too large")]
    InvalidBudget(u64),
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("checkpoint mismatch: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
