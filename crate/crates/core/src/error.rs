use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("degenerate arc: {0}")]
    DegenerateArc(String),

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        LabError::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors caused by user-supplied parameters rather than I/O.
    pub fn is_parameter_error(&self) -> bool {
        matches!(
            self,
            LabError::InvalidParameter { .. }
                | LabError::Domain(_)
                | LabError::Range(_)
                | LabError::ResourceGuard(_)
                | LabError::DegenerateArc(_)
                | LabError::Parse(_)
        )
    }
}
