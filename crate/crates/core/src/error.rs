use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse failure: {0}")]
    Parse(String),

    #[error("validation failure: {0}")]
    Validation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no grating of order {order} phase-matches this process")]
    NoGratingOfThisOrder { order: i32 },

    #[error("process is bulk phase-matched (k_p - k_s - k_i = 0); use a bulk grating")]
    BulkPhaseMatched,

    #[error("process is not phase-matched at the grid centre (|dk L/2| = {0:.3e})")]
    NotPhaseMatched(f64),

    #[error("filter under-resolved: FWHM {fwhm_nm} nm is below three grid spacings ({min_nm} nm)")]
    FilterUnderResolved { fwhm_nm: f64, min_nm: f64 },

    #[error("non-finite value in joint spectrum")]
    NonFinite,

    #[error("reduced states live on different wavelength axes")]
    AxesDiffer,

    #[error("no degenerate group-velocity-matching point in the pump window")]
    NoGvmPoint,

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
