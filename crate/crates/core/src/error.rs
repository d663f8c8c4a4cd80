use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("density too rough: covariance quadrature did not converge with {points} points")]
    DensityTooRough { points: usize },

    #[error("normalization error: Γ(0) = {gamma0} (expected 1 within 1e-8)")]
    Normalization { gamma0: f64 },

    #[error("covariance has imaginary residue {residue:e}; density is not even")]
    NotEven { residue: f64 },

    #[error("density not strictly positive: minimum {min} on the check grid")]
    NotStrictlyPositive { min: f64 },

    #[error("invalid covariance sequence: {0}")]
    InvalidCovariance(String),

    #[error("model `{0}` has no spectral density")]
    UnsupportedModel(&'static str),

    #[error("covariance sequence covers lags 0..={available}, need 0..={required}")]
    MissingLags { required: usize, available: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("spectral quadrature hit its refinement limit at x = {x}")]
    RefinementLimit { x: f64 },

    #[error("degenerate point x = {x}: AC - B^2 = {gram:e}")]
    Degenerate { x: f64, gram: f64 },

    #[error("breakpoints need n >= 16, got n = {0}")]
    BreakpointOrdering(usize),

    #[error("invalid interval ({lo}, {hi})")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("growing-K regime needs K^2 < n (K = {k}, n = {n})")]
    OutOfRegime { k: f64, n: usize },

    #[error("y = {y} lies outside the edge zone ({lo}, {hi})")]
    OutsideZone { y: f64, lo: f64, hi: f64 },

    #[error("insufficient data: {got} rows, need at least {need}")]
    InsufficientData { got: usize, need: usize },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
