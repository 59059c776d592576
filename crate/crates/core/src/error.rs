use thiserror::Error;

/// Errors raised while parsing or assembling a history.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HistoryError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("value {val} is written to `{var}` more than once")]
    DuplicateValue { var: String, val: u64 },

    #[error("read {read} has no source: no write of {val} to `{var}`")]
    UnsourcedRead { read: String, var: String, val: u64 },

    #[error("inconsistent reads-from edge {from} -> {to}: {reason}")]
    AmbiguousRf {
        from: String,
        to: String,
        reason: String,
    },

    #[error("reference to nonexistent event `{reference}`")]
    DanglingRef { reference: String },

    #[error("invalid dependency edge {from} -> {to}: {reason}")]
    InvalidDp {
        from: String,
        to: String,
        reason: String,
    },
}

impl HistoryError {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        HistoryError::Syntax {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown memory model `{0}` (expected sc, tso, pso or rmo)")]
    UnknownModel(String),

    #[error("invalid dependency edge {from} -> {to}: {reason}")]
    InvalidDp {
        from: String,
        to: String,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("precondition violated: write {0} is already in the subset")]
    PreconditionViolated(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("history has {k} writes, exceeding the configured cap of {cap}")]
    KTooLarge { k: usize, cap: usize },

    #[error("write order is not a permutation of the history's writes: {0}")]
    NotAPermutation(String),

    #[error("internal error: extracted witness failed re-verification")]
    InternalWitnessInvalid,

    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("total-order oracle supports at most {cap} writes, history has {k}")]
    KTooLargeForOracle { k: usize, cap: usize },

    #[error("store-order search space of {size} exceeds the limit of {limit}")]
    SearchSpaceTooLarge { size: u128, limit: u128 },

    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("clause {clause} has {len} literals; only 3-literal clauses are accepted")]
    NotThreeSat { clause: usize, len: usize },

    #[error("malformed DIMACS: {0}")]
    MalformedDimacs(String),

    #[error("brute force supports at most {cap} variables, formula has {n}")]
    TooManyVars { n: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("no read has an alternative writer on its variable")]
    NoAlternativeWriter,

    #[error(transparent)]
    History(#[from] HistoryError),
}
