use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown mode label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate mode label `{0}`")]
    DuplicateLabel(String),

    #[error("invalid basis label `{label}`: {reason}")]
    BadBasisLabel { label: String, reason: String },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncation leakage {leakage:.3e} exceeds {threshold:.0e}; raise the cutoff")]
    Truncation { leakage: f64, threshold: f64 },

    #[error("forced measurement outcome has zero probability")]
    ZeroProbability,

    #[error("protocol misuse: {0}")]
    ProtocolMisuse(String),

    #[error("run already collapsed by a decoding measurement")]
    Collapsed,

    #[error("unphysical state: {0}")]
    Unphysical(String),

    #[error("state dimension {0} too large for a dense density matrix")]
    TooLarge(usize),

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("{kind} `{name}` registered twice")]
    DuplicateStrategy { kind: &'static str, name: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
