use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Variants fall in three groups: invalid input (caller mistakes), numerical
/// breakdown (the discretization or an iteration failed), and theory-violation
/// diagnostics (a computed result contradicts a property the model guarantees,
/// which indicates a bug or an under-resolved discretization).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("interface preference alpha must lie in (0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("invalid reaction: {0}")]
    InvalidReaction(String),
    #[error("interface values inconsistent at x = {x}: {left} vs {right}")]
    InconsistentInterfaceValues { x: f64, left: f64, right: f64 },

    #[error("no sign change of {what} in [{lo}, {hi}]")]
    NoRootInBracket { what: &'static str, lo: f64, hi: f64 },
    #[error("linear growth rates are degenerate: {0}")]
    DegenerateRates(String),
    #[error("inverse iteration did not converge after {iterations} iterations (last change {change:e})")]
    IterationDiverged { iterations: usize, change: f64 },
    #[error("computed eigenvector is not positive (min/max ratio {ratio:e})")]
    NonPositiveEigenvector { ratio: f64 },
    #[error("principal branch of det(M(lambda) - I) not found in [{lo}, {hi}]")]
    BranchSelectionFailed { lo: f64, hi: f64 },
    #[error("eigenvalue methods disagree: {a} vs {b} (gate {tol:e})")]
    MethodsDisagree { a: f64, b: f64, tol: f64 },
    #[error("not a source-sink configuration: f1'(0) = {f1}, f2'(0) = {f2}")]
    NotSourceSink { f1: f64, f2: f64 },

    #[error("grid too coarse: {0}")]
    ResolutionTooCoarse(String),
    #[error("initial data negative at x = {x}: {value}")]
    NegativeInitialData { x: f64, value: f64 },
    #[error("newton iteration diverged at t = {t} (residual {residual:e})")]
    NewtonDiverged { t: f64, residual: f64 },
    #[error("banded linear solve failed: zero pivot at row {0}")]
    LinearSolveFailed(usize),
    #[error("time step {dt} exceeds the IMEX stability bound {dt_max}")]
    StepTooLarge { dt: f64, dt_max: f64 },
    #[error("solution left [0, {bound}] at t = {t}: value {value} at x = {x}")]
    BoundViolated { t: f64, x: f64, value: f64, bound: f64 },
    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("steady-state iteration stalled after {steps} steps (change {change:e})")]
    ConvergenceStalled { steps: usize, change: f64 },
    #[error("principal eigenvalue {lambda1} disagrees with observed dynamics: {observed}")]
    EigenInconsistent { lambda1: f64, observed: String },
    #[error("time-marching from different initial data reached different limits (gap {gap:e})")]
    NonUniqueLimit { gap: f64 },

    #[error("zero state is not unstable: lambda1 = {0}")]
    NotPersistent(f64),
    #[error("could not bracket the minimum of -lambda(mu)/mu")]
    BracketNotFound,
    #[error("front reached the truncation boundary at t = {t}")]
    FrontHitBoundary { t: f64 },
    #[error("no level crossing found: {0}")]
    NoCrossingFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveParameter { name, value })
    }
}
