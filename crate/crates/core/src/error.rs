use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("value {value} is outside the fixed-point range (|x| < {limit})")]
    Overflow { value: f64, limit: f64 },

    #[error("invalid fixed-point parameters: ring_bits={ring_bits}, frac_bits={frac_bits}")]
    InvalidFixedParams { ring_bits: u32, frac_bits: u32 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("label {label} out of range for {classes} classes")]
    InvalidLabel { label: usize, classes: usize },

    #[error("replicated shares are inconsistent at party {party}, element {index}")]
    Integrity { party: usize, index: usize },

    #[error("negative input to square root: {0}")]
    NegativeSqrt(f64),

    #[error("population of {clients} clients is too small for committees of size {committee}")]
    PopulationTooSmall { clients: usize, committee: usize },

    #[error("expected {expected} scores, got {actual}")]
    WrongLength { expected: usize, actual: usize },

    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("malformed IDX file: {0}")]
    Idx(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
