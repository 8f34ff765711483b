use thiserror::Error;

/// Errors produced by the numerical kernels and the geometry layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Adaptive quadrature ran out of subdivisions. Carries the best
    /// estimate reached and its error bound.
    #[error("subdivision budget exhausted (estimate {estimate}, error bound {error})")]
    Budget { estimate: f64, error: f64 },

    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("maximizer stuck on the slope box boundary after enlarging")]
    SearchBox,

    #[error("function is not coercive: estimated radial slope {gamma} <= 0")]
    NotCoercive { gamma: f64 },

    #[error("invalid construction: {0}")]
    Construction(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("wet region exceeds the truncation ball: {0}")]
    Region(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("convexity violation: Hessian determinant {det} at ({x}, {y})")]
    ConvexityViolation { det: f64, x: f64, y: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
