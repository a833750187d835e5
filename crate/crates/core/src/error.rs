use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RieszError {
    #[error("dimension must be a positive integer, got {0}")]
    Dimension(i64),
    #[error("sign constraint violated: {0}")]
    Sign(String),
    #[error("subcriticality violated: alpha + beta + lambda = {sum} must be < d = {d}")]
    Subcriticality { sum: f64, d: usize },
    #[error("p = {p} outside the open admissible interval ({p_minus}, {p_plus}); the operator norm is infinite there")]
    OutOfRange { p: f64, p_minus: f64, p_plus: f64 },
    #[error("unsupported form: {0}")]
    UnsupportedForm(String),
    #[error("L_{p} norm diverges for profile '{label}'")]
    DivergentNorm { label: String, p: f64 },
    #[error("angular kernel singular at r = s = {r} for d = {d}, lambda = {lambda}")]
    SingularArgument { d: usize, lambda: f64, r: f64 },
    #[error("profile '{0}' is not in L(p_-, p_+)")]
    NotInL(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("Monte Carlo oracle supports d <= 3, got d = {0}")]
    UnsupportedDimension(usize),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("power iteration collapsed to a zero iterate at step {0}")]
    NonPositiveIterate(usize),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl RieszError {
    /// Configuration problems versus numerical failures; the CLI maps these
    /// to exit codes 2 and 1.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            RieszError::Dimension(_)
                | RieszError::Sign(_)
                | RieszError::Subcriticality { .. }
                | RieszError::OutOfRange { .. }
                | RieszError::InvalidProfile(_)
                | RieszError::UnsupportedDimension(_)
                | RieszError::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, RieszError>;
