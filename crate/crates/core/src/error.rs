use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("series did not converge after {terms} terms (tail estimate {tail:e})")]
    NonConvergence { terms: usize, tail: f64 },

    #[error("argument {arg:.6} rad lies inside the excluded sector |arg z| < {mu:.6}")]
    SectorViolation { arg: f64, mu: f64 },

    #[error("|z| = {modulus:e} is below the asymptotic radius {radius:e}")]
    RadiusTooSmall { modulus: f64, radius: f64 },

    #[error("|z| = {modulus:e} exceeds the series radius {radius:e}")]
    RadiusTooLarge { modulus: f64, radius: f64 },

    #[error("requested accuracy cannot be reached at z = {re:e}{im:+e}i: {reason}")]
    AccuracyUnreachable { re: f64, im: f64, reason: String },

    #[error("time grids do not match: {0}")]
    GridMismatch(String),

    #[error("point {0:?} lies outside the domain")]
    PointOutsideDomain(Vec<f64>),

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("adjoint state is singular at t = T (alpha = {alpha})")]
    SingularNode { alpha: f64 },

    #[error("Gramian condition number {condition:e} exceeds cap {cap:e}; pass a positive regularization")]
    IllConditioned { condition: f64, cap: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::AccuracyUnreachable { .. }
                | Error::IllConditioned { .. }
                | Error::QuadratureFailure(_)
                | Error::Degenerate(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
