use thiserror::Error;

pub type Result<T, E = CmfError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CmfError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The template carries no energy on the observation band, so the
    /// concentration metrics are undefined.
    #[error("template has zero energy on the observation band")]
    ZeroEnergy,

    #[error("degenerate measurement: {0}")]
    DegenerateMeasurement(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CmfError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CmfError::InvalidParameter(msg.into())
    }
}
