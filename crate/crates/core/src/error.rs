use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("level index {index} out of range (spectrum holds {available} levels)")]
    LevelOutOfRange { index: usize, available: usize },

    #[error(
        "eigensolver failed to converge (dim {dim}, eigenvalue {index}, norm {norm:.3e})"
    )]
    NoConvergence { dim: usize, index: usize, norm: f64 },

    #[error("levels {lower} and {upper} are degenerate (splitting {splitting:.3e} GHz)")]
    Degenerate { lower: usize, upper: usize, splitting: f64 },

    #[error("truncation did not converge below N = {max_n} (last |df01| = {last_delta:.3e} GHz)")]
    TruncationNotConverged { max_n: usize, last_delta: f64 },

    #[error(
        "Hellmann-Feynman and finite-difference gradients disagree: {analytic:.6e} vs {numeric:.6e} \
         (f01 = {f01:.3e} GHz, likely near-degenerate)"
    )]
    GradientMismatch { analytic: f64, numeric: f64, f01: f64 },

    #[error("rate matrix block for levels >= 2 is singular (level {level} has no escape route)")]
    SingularReduction { level: usize },

    #[error("cpr sampling not even in phi: max |U(phi) - U(-phi)| = {asymmetry:.3e}")]
    NotEven { asymmetry: f64 },

    #[error("harmonic E_1 vanishes; ratio E_2/E_1 undefined")]
    VanishingFirstHarmonic,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
