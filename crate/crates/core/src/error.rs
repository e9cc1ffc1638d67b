use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("cannot compose: codomain {left} does not match domain {right}")]
    CompositionMismatch { left: String, right: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid finite set: {0}")]
    InvalidSet(String),

    #[error("invalid groupoid (block {block}): {reason}")]
    InvalidGroupoid { block: usize, reason: String },

    #[error("not a mixed state: {0}")]
    NotMixedState(String),

    #[error("carrier mismatch: {0}")]
    CarrierMismatch(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("underlying map is not an isometry")]
    NotIsometry,

    #[error("idempotence violated: (M x id_Z) . M != (id_X x copy_Z) . M")]
    IdempotenceViolation,

    #[error("self-adjointness violated: (id_X x cap_Z) . (M x id_Z) != P^dagger . (id_X x dec_Z)")]
    SelfAdjointnessViolation,

    #[error("state is not causal")]
    NotCausal,

    #[error("verification failed: {0}")]
    VerificationFailure(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("generation exhausted after {0} attempts")]
    GenerationExhausted(usize),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
