use thiserror::Error;

use crate::copula::Diagnostics;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data in column {column}: {message}")]
    InvalidData { column: usize, message: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("copula failed validation: {0}")]
    Validation(Diagnostics),

    #[error(
        "marginal rebalancing did not converge (residual {residual:.3e} after {sweeps} sweeps)"
    )]
    RebalanceFailed { residual: f64, sweeps: usize },

    #[error("slab {slab} of axis {axis} has zero mass")]
    DegenerateMarginal { axis: usize, slab: usize },

    #[error("incompatible star operands: {0}")]
    IncompatibleOperands(String),

    #[error("measure evaluation failed: {0}")]
    EvaluationFailed(String),

    #[error("upper bound {0:.3e} is too small to normalize by")]
    DegenerateBound(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by bad user input rather than numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::InvalidData { .. }
                | Error::InsufficientData(_)
                | Error::IncompatibleOperands(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}
