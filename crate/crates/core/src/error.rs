use thiserror::Error;

/// Errors raised by the geometry, quadrature and flow kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("variable index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("jet dimension {dim} / order {order} outside supported range (dim 1..={max_dim}, order <= {max_order})")]
    UnsupportedLayout {
        dim: usize,
        order: usize,
        max_dim: usize,
        max_order: usize,
    },

    #[error("derivative order {requested} exceeds available order {available}")]
    OrderExceeded { requested: usize, available: usize },

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid chart point: {0}")]
    InvalidChartPoint(String),

    #[error("degenerate metric (condition estimate {condition:.3e})")]
    DegenerateMetric { condition: f64 },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("under-resolved: spectral tail energy {tail:.3e} above {threshold:.3e}")]
    UnderResolved { tail: f64, threshold: f64 },

    #[error("blow-up detected at step {step}: {reason}")]
    BlowUp { step: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
