use thiserror::Error;

#[derive(Debug, Error)]
pub enum PinError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} outside table range {min}..={max}")]
    OutOfRange { index: usize, min: usize, max: usize },

    #[error("horizon {horizon} exceeds {what} ({available})")]
    HorizonTooLarge {
        horizon: usize,
        what: &'static str,
        available: usize,
    },

    #[error("partition function vanishes at n = {0}")]
    ZeroPartition(usize),

    #[error("ladder truncated: N = {requested} needs levels beyond N_max = {max_jumps} at n = {n}")]
    Truncated {
        requested: usize,
        max_jumps: usize,
        n: usize,
    },

    #[error("truncation gap {gap:.3e} exceeds {threshold:.1e} at N = {level}")]
    TruncationGap {
        level: usize,
        gap: f64,
        threshold: f64,
    },

    #[error("bisection predicate is constant on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("empty collection")]
    Empty,

    #[error("paths end at different sites ({0} and {1})")]
    MixedLengths(usize, usize),

    #[error("bad magic bytes in environment file")]
    BadMagic,

    #[error("unsupported environment file version {0}")]
    VersionMismatch(u8),

    #[error("environment file truncated: expected {expected} bytes, found {found}")]
    TruncatedFile { expected: usize, found: usize },

    #[error("checksum mismatch: stored {stored:016x}, computed {computed:016x}")]
    ChecksumMismatch { stored: u64, computed: u64 },

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PinError>;
