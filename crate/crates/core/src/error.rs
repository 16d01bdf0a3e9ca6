use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("literal {0} is already on the trail")]
    AlreadyAssigned(String),
    #[error("backjump level {level} out of range (current decision level {current})")]
    BackjumpLevel { level: u32, current: u32 },
    #[error("backjump requires an inconsistent trail")]
    TrailConsistent,
    #[error("the trail is inconsistent")]
    TrailInconsistent,
    #[error("trail entry {0} is a decision and has no reason")]
    DecisionHasNoReason(usize),
    #[error("clause {0} is not in the store")]
    ClauseAbsent(u64),
    #[error("clause {0} is the reason of a trail entry and cannot be forgotten")]
    ClausePinned(u64),
    #[error("restart requires a non-empty trail")]
    EmptyTrail,
    #[error("state is FailState")]
    Failed,
    #[error("conflict analysis requires an inconsistent trail with a decision literal")]
    NoConflict,
    #[error("program has {0} atoms; brute-force enumeration is limited to {max}", max = crate::oracle::MAX_ATOMS)]
    TooManyAtoms(usize),
    #[error("program is not negation-free")]
    NotNegationFree,
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("invalid tier specification: {0}")]
    TierSpec(String),
    #[error("malformed trace record at line {line}: {message}")]
    TraceRecord { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
