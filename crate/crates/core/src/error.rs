use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in `{field}`: expected {expected}, found {found}")]
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("site {site} has color {color}, outside 1..={kappa}")]
    InvalidColor {
        site: usize,
        color: usize,
        kappa: usize,
    },

    #[error("site {site} has spin {value}, expected +1 or -1")]
    InvalidSpin { site: usize, value: i64 },

    #[error("enumeration needs {required} configurations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("the color sector contains no configuration")]
    EmptySector,

    #[error("cannot build an in-sector configuration by rounding N*d: {0}")]
    SectorUnreachable(String),

    #[error("ladder betas must start at 0 and increase strictly (violated at index {index})")]
    NonMonotoneLadder { index: usize },

    #[error("threshold scan reached its cap of kappa = {cap} without a hit")]
    ThresholdCapExceeded { cap: u64 },

    #[error("malformed disorder data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
