use thiserror::Error;

/// Errors raised while building or interpreting computations.
///
/// Every variant carries plain text so errors can be cloned into abort
/// nodes and compared in tests.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unhandled effect `{kind}`")]
    Unhandled { kind: String },

    #[error("tag mismatch in {kind}.{slot}: expected {expected}, found {found}")]
    TagMismatch {
        kind: String,
        slot: String,
        expected: String,
        found: String,
    },

    #[error("recursion depth limit of {limit} exceeded")]
    DepthExceeded { limit: usize },

    #[error("once: empty scope")]
    OnceEmptyScope,

    #[error("dangling thunk pointer {0}")]
    DanglingThunk(usize),

    #[error("unevaluated thunk in eager mode at pointer {0}")]
    UnevaluatedThunk(usize),

    #[error("apply non-function")]
    ApplyNonFunction,

    #[error("unbound variable {0}")]
    UnboundVariable(usize),

    #[error("law check: {0}")]
    Law(String),

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub fn unhandled(kind: impl Into<String>) -> Self {
        Error::Unhandled { kind: kind.into() }
    }

    pub fn mismatch(
        kind: impl Into<String>,
        slot: impl Into<String>,
        expected: impl Into<String>,
        found: impl Into<String>,
    ) -> Self {
        Error::TagMismatch {
            kind: kind.into(),
            slot: slot.into(),
            expected: expected.into(),
            found: found.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
