use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("entry {index} = {value} is outside the admissible range {range}")]
    EntryOutOfRange {
        index: usize,
        value: f64,
        range: &'static str,
    },

    #[error("operation needs a finite sequence")]
    InfiniteSequence,

    #[error("invalid sequence tail: {0}")]
    InvalidTail(String),

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector is not unit norm (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("the two source weights must differ")]
    EqualEta,

    #[error("majorization fails (first violated partial sum: {failing_index:?}, sum gap {sum_gap:e})")]
    Majorization {
        failing_index: Option<usize>,
        sum_gap: f64,
    },

    #[error("first target weight must be positive")]
    ZeroTarget,

    #[error("sequence violates the Kadison condition (a = {a}, b = {b})")]
    Kadison { a: f64, b: f64 },

    #[error("trace mismatch: sequence sums to {sequence}, operator trace is {operator}")]
    TraceMismatch { sequence: String, operator: String },

    #[error("matrix is not a partial isometry onto the range projection (deviation {deviation:e})")]
    NotPartialIsometry { deviation: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("stage {stage}: {detail}")]
    PlanAssertion { stage: usize, detail: String },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI in reports.
    pub fn reason(&self) -> &'static str {
        match self {
            Error::EntryOutOfRange { .. } => "range",
            Error::InfiniteSequence => "infinite",
            Error::InvalidTail(_) => "tail",
            Error::NotHermitian { .. } => "hermitian",
            Error::NotPsd { .. } => "psd",
            Error::DimensionMismatch { .. } => "dimension",
            Error::NotUnit { .. } => "unit",
            Error::EqualEta => "equal-eta",
            Error::Majorization { .. } => "majorization",
            Error::ZeroTarget => "zero-target",
            Error::Kadison { .. } => "kadison",
            Error::TraceMismatch { .. } => "trace",
            Error::NotPartialIsometry { .. } => "partial-isometry",
            Error::Precondition(_) => "precondition",
            Error::PlanAssertion { .. } => "plan",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
