use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),

    #[error("potential is not a double well: {0}")]
    NotADoubleWell(String),

    #[error("matrix is not Hermitian (max |H - H^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("eigensolver failed: {0}")]
    Solver(String),

    #[error("no eigenstate with more than {threshold} probability on the {side} side among the first {searched} states")]
    ReactantNotFound {
        threshold: f64,
        side: &'static str,
        searched: usize,
    },

    #[error("filter removed the whole wavefunction (post-filter norm {0:e})")]
    DegenerateFilter(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("relaxation timescale undefined: {0}")]
    UndefinedTimescale(String),

    #[error("exponential fit failed: {0}")]
    FitFailure(String),

    #[error("unknown chemical system `{name}` (known: {known})")]
    UnknownSystem { name: String, known: String },

    #[error("registry data is malformed: {0}")]
    Registry(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
