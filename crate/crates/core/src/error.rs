use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("inadmissible state: {0}")]
    InadmissibleState(String),

    #[error("direction index {index} out of range for a system in {dim} space dimension(s)")]
    InvalidDirection { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("system `{0}` is quasi-linear only and has no conservative flux")]
    NonConservative(String),

    #[error("entropy `{0}` is not strictly convex")]
    NotStrictlyConvex(String),

    #[error("entropy `{0}` has no Hessian (Lipschitz-only observable)")]
    HessianUnavailable(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("quadrature not converged: value {value}, error estimate {error:e}")]
    QuadratureNotConverged { value: f64, error: f64 },

    #[error("flux is not strictly convex on [{lo}, {hi}]")]
    NonConvexFlux { lo: f64, hi: f64 },

    #[error("Riemann data generate vacuum (pressure positivity condition violated by {0:e})")]
    VacuumFormation(f64),

    #[error("left and right states coincide")]
    SameState,

    #[error("expansion shock requires u- < u+ for a convex flux")]
    NotExpansive,

    #[error("point (t={t}, x={x}) lies outside the field's domain")]
    OutsideDomain { t: f64, x: f64 },

    #[error("perturbation support violation: {0}")]
    SupportViolation(String),

    #[error("perturbed field leaves the admissible set: {0}")]
    AdmissibilityViolation(String),

    #[error("invalid window: {0}")]
    WindowInvalid(String),

    #[error("entropy `{0}` is not declared compatible with its system")]
    PairNotCompatible(String),

    #[error("candidates `{first}` and `{second}` disagree at t={t}, x={x} (difference {diff:e})")]
    CandidatesDisagreeAtT { first: String, second: String, t: f64, x: f64, diff: f64 },

    #[error("candidates differ at the wave-support hull boundary x={x}")]
    NonCompactWaveSupport { x: f64 },

    #[error("homogeneity check requires a nonzero state and nonzero flux")]
    ZeroState,

    #[error("normal vector must have unit length, got norm {0}")]
    InvalidNormal(f64),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("unknown entropy `{pair}` for system `{system}`")]
    UnknownPair { system: String, pair: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid field: {0}")]
    InvalidField(String),
}
