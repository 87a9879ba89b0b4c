use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("candidate list is empty")]
    EmptyInstance,

    #[error("duplicate candidate id `{0}`")]
    DuplicateId(String),

    #[error("candidate `{id}` has {found} attributes, expected {expected}")]
    AttributeArity {
        id: String,
        expected: usize,
        found: usize,
    },

    #[error("candidate `{id}` has invalid score {score} (must be finite and >= 0)")]
    InvalidScore { id: String, score: f64 },

    #[error("no classes remain after removing classes smaller than {min_size}")]
    NoClassesRemain { min_size: usize },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("quota k = {k} exceeds pool size n = {n}")]
    QuotaExceedsPool { k: usize, n: usize },

    #[error("selection has {found} entries but the instance has {expected} classes")]
    SelectionLength { expected: usize, found: usize },

    #[error("class `{label}` (index {index}): {count} admitted exceeds class size {size}")]
    Infeasible {
        index: usize,
        label: String,
        count: usize,
        size: usize,
    },

    #[error("class `{label}` (index {index}) has no unadmitted candidates left")]
    ClassExhausted { index: usize, label: String },

    #[error("instance too large for count enumeration: {compositions} compositions (limit {limit})")]
    OracleTooLarge { compositions: u128, limit: u128 },

    #[error("instance too large for subset enumeration: n = {n} (limit {limit})")]
    SubsetOracleTooLarge { n: usize, limit: usize },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("line {line}: value `{value}` in column `{column}` matches no bin")]
    UnmatchedValue {
        line: u64,
        column: String,
        value: String,
    },

    #[error("line {line}: non-numeric score `{value}`")]
    BadScore { line: u64, value: String },

    #[error("invalid coding config: {0}")]
    InvalidCoding(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("invalid sweep config: {0}")]
    InvalidSweep(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input data or arguments rather than by
    /// the environment.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
