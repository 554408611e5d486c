use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid mode specification: {0}")]
    InvalidModeSpec(String),
    #[error("Fock dimension {dim} exceeds the cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },
    #[error("mode index {mode} out of range for {n_modes} mode(s)")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} operator(s), got {got}")]
    WrongOperatorCount { expected: usize, got: usize },
    #[error("coherent label |z| = {radius} exceeds the radius bound {bound}")]
    RadiusExceeded { radius: f64, bound: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),
    #[error("resolution of unity did not reach tolerance {tolerance:e}: measured defect {defect:e}")]
    QuadratureNotConverged { defect: f64, tolerance: f64 },
    #[error("term degree {degree} exceeds the cap {cap}")]
    DegreeOverflow { degree: u32, cap: u32 },
    #[error("operator degree {degree} exceeds the cutoff {cutoff}")]
    DegreeExceedsCutoff { degree: u32, cutoff: usize },
    #[error("invalid polynomial map: {0}")]
    InvalidPolyMap(String),
    #[error("invalid atlas: {0}")]
    InvalidAtlas(String),
    #[error("missing transition connecting chart `{0}` to `{1}`")]
    MissingTransition(String, String),
    #[error("invalid duality candidate set: {0}")]
    InvalidCandidates(String),
    #[error("at least one sample point is required")]
    NoSamples,
    #[error("zero vector cannot be normalized")]
    ZeroVector,
}
