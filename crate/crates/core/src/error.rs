use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),

    #[error("duplicate edge between `{0}` and `{1}`")]
    DuplicateEdge(String, String),

    #[error("self-loop on `{0}`")]
    SelfLoop(String),

    #[error("directed cycle through `{0}`")]
    Cycle(String),

    #[error("{role} graph invariant violated: {message}")]
    RoleViolation { role: &'static str, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{what} bound exceeded: {actual} > {limit}")]
    BoundExceeded {
        what: &'static str,
        limit: usize,
        actual: usize,
    },

    #[error("no edge between `{0}` and `{1}`")]
    MissingEdge(String, String),

    #[error("pattern absent: {0}")]
    PatternAbsent(String),

    #[error("closure conflict: {0}")]
    Conflict(String),

    #[error("skeleton mismatch: {0}")]
    SkeletonMismatch(String),

    #[error("observable sets differ")]
    ObservableMismatch,

    #[error("rule side condition fails: {0}")]
    RuleCheckFailed(String),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn role(role: &'static str, message: impl Into<String>) -> Self {
        Error::RoleViolation {
            role,
            message: message.into(),
        }
    }

    pub(crate) fn pre(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }
}
