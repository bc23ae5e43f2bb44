use thiserror::Error;

/// Errors raised while building chains or evaluating quantities on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("row {row} ({state}) sums to {sum}, outside 1 +/- 1e-12")]
    RowSum { row: usize, state: String, sum: f64 },
    #[error("negative transition probability {value} at ({from}, {to})")]
    NegativeEntry {
        from: String,
        to: String,
        value: f64,
    },
    #[error("transition probability {value} at ({from}, {to}) is not a finite number in [0, 1]")]
    InvalidEntry {
        from: String,
        to: String,
        value: f64,
    },
    #[error("duplicate state identifier `{0}`")]
    DuplicateState(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("state `{0}` has no class assignment")]
    MissingState(String),
    #[error("state `{0}` is assigned to more than one class")]
    DuplicateAssignment(String),
    #[error("class {0} is empty")]
    EmptyClass(char),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("C is unreachable from {} state(s) of A and B, e.g. `{}`", .0.len(), .0[0])]
    Unreachable(Vec<String>),
    #[error("domain has no escape from state `{0}`: the Green's function diverges")]
    DivergentDomain(String),
    #[error("linear solve failed: {0}")]
    Solve(String),
    #[error("state `{state}` has class {found}, expected {expected}")]
    PartitionClass {
        state: String,
        found: char,
        expected: &'static str,
    },
    #[error("inner set is not a subset of the outer set (state `{0}`)")]
    Subset(String),
    #[error("{count} states in A and B exceed the report cap of {cap}")]
    CapExceeded { count: usize, cap: usize },
    #[error("no chain passing absorption validation after {0} attempts")]
    RetriesExhausted(usize),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed document: {0}")]
    Parse(String),
}

impl Error {
    /// Short kebab-case tag used as the machine-readable error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::RowSum { .. } => "row-sum",
            Error::NegativeEntry { .. } => "negative-entry",
            Error::InvalidEntry { .. } => "invalid-entry",
            Error::DuplicateState(_) => "duplicate-state",
            Error::Dimension(_) => "dimension",
            Error::MissingState(_) => "missing-state",
            Error::DuplicateAssignment(_) => "duplicate-assignment",
            Error::EmptyClass(_) => "empty-class",
            Error::UnknownState(_) => "unknown-state",
            Error::Unreachable(_) => "unreachable",
            Error::DivergentDomain(_) => "divergent-domain",
            Error::Solve(_) => "solve",
            Error::PartitionClass { .. } => "partition-class",
            Error::Subset(_) => "subset",
            Error::CapExceeded { .. } => "cap-exceeded",
            Error::RetriesExhausted(_) => "retries-exhausted",
            Error::Geometry(_) => "geometry",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Parse(_) => "parse",
        }
    }

    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::DivergentDomain(_) | Error::Solve(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
