use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid form: {0}")]
    InvalidForm(String),

    #[error(
        "shell d={d} k={k} lambda={lambda} has {count} points, over the cap of {cap}; use count-only mode"
    )]
    ShellBudget {
        d: usize,
        k: u32,
        lambda: u64,
        count: u128,
        cap: usize,
    },

    #[error("integer overflow while {0}")]
    Overflow(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("Birch criterion d - dim V > (k-1)2^k fails for d={d}, k={k}: {d} - 0 <= {bound}")]
    BirchCriterion { d: usize, k: u32, bound: u64 },

    #[error("regime violation: {0}")]
    Regime(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidForm(_) => "invalid_form",
            Error::ShellBudget { .. } => "shell_budget",
            Error::Overflow(_) => "overflow",
            Error::Budget(_) => "budget",
            Error::InvalidExponent(_) => "invalid_exponent",
            Error::Precondition(_) => "precondition",
            Error::BirchCriterion { .. } => "birch_criterion",
            Error::Regime(_) => "regime",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::Quadrature(_) => "quadrature",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
