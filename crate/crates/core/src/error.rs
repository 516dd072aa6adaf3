use thiserror::Error;

use crate::engine::ProjectionSet;

pub type Result<T> = std::result::Result<T, CtcError>;

#[derive(Debug, Error)]
pub enum CtcError {
    #[error("label collision: {0}")]
    LabelCollision(String),

    #[error("arity mismatch: gate expects {expected} targets, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("unknown channel label: {0}")]
    Label(String),

    /// The post-selection has (numerically) zero acceptance.
    /// Carries the full projection set when one was computed.
    #[error("paradox: acceptance norm {norm:e} is below tolerance")]
    Paradox {
        norm: f64,
        projections: Option<Box<ProjectionSet>>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("circuit has no CTC channel")]
    NoCtc,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown scenario: {0}")]
    NotFound(String),

    #[error("numerical error: {0}")]
    Numerics(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("too many qubits: {0} (limit {limit})", limit = crate::state::MAX_QUBITS)]
    TooManyQubits(usize),

    #[error("infinite skew: {0}")]
    InfiniteSkew(String),
}

impl CtcError {
    pub fn is_paradox(&self) -> bool {
        matches!(self, CtcError::Paradox { .. })
    }
}
