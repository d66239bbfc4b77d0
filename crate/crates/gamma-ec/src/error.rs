use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("pole of Gamma at {0}")]
    Pole(Complex64),
    #[error("outside domain: {0}")]
    Domain(String),
    #[error("branch point encountered near {0}")]
    BranchPoint(Complex64),
    #[error("function vanishes identically along the sampled direction")]
    DegenerateDirection,
    #[error("no perturbation radius found below {0:e}")]
    NoRadiusFound(f64),
    #[error("level-curve trace diverged near {at}: {reason}")]
    TraceDivergence { at: Complex64, reason: String },
    #[error("contour geometry: {0}")]
    Geometry(String),
    #[error("function vanishes on the contour near {0}")]
    ZeroOnContour(Complex64),
    #[error("winding refinement did not converge: {0}")]
    NonConvergence(String),
    #[error("no sign change found along the search ray from {0}")]
    NoCrossing(Complex64),
    #[error("separation inequality '{check}' failed on {segment} at {at} (ratio {ratio:.6})")]
    SeparationFailure {
        check: String,
        segment: String,
        at: Complex64,
        ratio: f64,
    },
    #[error("Newton refinement stalled: {0}")]
    NewtonDivergence(String),
    #[error("xi selection failed at condition {condition}: {detail}")]
    SelectionFailure { condition: String, detail: String },
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
