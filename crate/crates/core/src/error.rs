use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not normal (defect {defect:.3e})")]
    NotNormal { defect: f64 },
    #[error("matrix is not a projection (defect {defect:.3e})")]
    NotProjection { defect: f64 },
    #[error("algebra has no unit")]
    NotUnital,
    #[error("map is not a *-automorphism (defect {defect:.3e})")]
    NotAutomorphism { defect: f64 },
    #[error("invalid group table: {0}")]
    InvalidGroup(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("grid of {n} points is too coarse (need at least {min})")]
    GridTooCoarse { n: usize, min: usize },
    #[error("bump support wraps around the circle and cannot be lifted to one sheet")]
    SupportWraps,
    #[error("theta mismatch: {0} vs {1}")]
    ThetaMismatch(f64, f64),
    #[error("tau has zero imaginary part")]
    DegenerateTau,
    #[error("p = {p} and q = {q} are not coprime")]
    NotCoprime { p: i64, q: usize },
    #[error("theta {theta} is not compatible with the clock-shift model p/q = {p}/{q}")]
    ThetaIncompatible { theta: f64, p: i64, q: usize },
    #[error("window W = {w} too small: {reason}")]
    WindowTooSmall { w: usize, reason: String },
    #[error("family is not a partition of unity (defect {defect:.3e})")]
    NotPartition { defect: f64 },
    #[error("orthogonalization failed: {0}")]
    OrthogonalizationFailed(String),
    #[error("frame conditions fail: {0}")]
    FrameFailed(String),
    #[error("closure exceeded ambient dimension {0}")]
    ClosureDiverged(usize),
    #[error("eigenvalue within {tol:.1e} of the branch cut (angle {angle})")]
    EigenvalueOnCut { angle: f64, tol: f64 },
    #[error("element is not differentiable: commutator norm {norm:.3e}")]
    NotDifferentiable { norm: f64 },
    #[error("cutoff {lambda} beyond series length {len}")]
    BeyondSeries { lambda: f64, len: usize },
    #[error("series is not logarithmically divergent (slope {slope:.3e} +- {stderr:.3e})")]
    NotLogDivergent { slope: f64, stderr: f64 },
    #[error("not enough terms: {got} < {need}")]
    InsufficientTerms { got: usize, need: usize },
    #[error("not a unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
