use thiserror::Error;

use crate::algebra::StatePoint;
use crate::stability::StabilityClass;

/// Errors raised by the toolkit. Refusals (`HypothesisFailed`) are kept
/// distinct from numerical inconsistencies so callers can map them to
/// different exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("generator {index} is not anti-Hermitian (residual {residual:.3e})")]
    NonAntiHermitian { index: usize, residual: f64 },
    #[error("generator {index} is linearly dependent on the previous ones")]
    RankDeficient { index: usize },
    #[error("representation is not a Lie algebra homomorphism (residual {residual:.3e})")]
    NotAHomomorphism { residual: f64 },
    #[error("basis is not closed under commutator (residual {residual:.3e})")]
    NotClosed { residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("stabilizer is the whole algebra, no transverse directions")]
    EmptyComplement,
    #[error("generator spectrum is not rational up to scale (eigenvalue ratio {value})")]
    IrrationalSpectrum { value: f64 },
    #[error("point of norm {norm} lies outside the model ball of radius {radius}")]
    OutsideBall { norm: f64, radius: f64 },
    #[error("slice model is invalid: {0}")]
    InvalidModel(String),
    #[error("kempf-ness flow did not terminate after {iterations} iterations (|nu| = {moment_norm:.3e})")]
    MaxIterExceeded { iterations: usize, moment_norm: f64 },
    #[error("line search failed at iteration {iteration} (|nu| = {moment_norm:.3e})")]
    LineSearchFailed { iteration: usize, moment_norm: f64 },
    #[error("flow verdict {flow:?} disagrees with exact verdict {oracle:?}")]
    OracleMismatch { flow: StabilityClass, oracle: StabilityClass },
    #[error("operation requires a torus action")]
    NotTorus,
    #[error("hypothesis failed: lambda*|mu| = {product:.6e} >= delta = {delta:.6e}")]
    HypothesisFailed { product: f64, delta: f64, lambda: f64, mu_norm: f64 },
    #[error("moment value is not orthogonal to the stabilizer (max pairing {residual:.3e})")]
    OrthogonalityFailed { residual: f64 },
    #[error("continuation left the delta-ball (|eta| = {eta_norm:.6e}, delta = {delta:.6e})")]
    LeftBall { eta_norm: f64, delta: f64, trace: Vec<(f64, f64)> },
    #[error("final |eta| = {eta_norm:.6e} exceeds lambda*|mu(x0)| = {bound:.6e}")]
    EtaBoundExceeded { eta_norm: f64, bound: f64 },
    #[error("continuation stagnated at |mu| = {mu_norm:.3e} after {iterations} steps")]
    Stagnation { iterations: usize, mu_norm: f64 },
    #[error("sampled point e^(i xi) x0 leaves the model ball (norm {norm}, radius {radius})")]
    BallExitsModel { norm: f64, radius: f64 },
    #[error("internal consistency: {0}")]
    InternalConsistency(String),
    #[error("no point of the t-grid satisfied the hypothesis")]
    /// `samples` holds `(t, |mu(t v)|, lambda bound, product)`.
    NeverSatisfied { v_balanced: StatePoint, samples: Vec<(f64, f64, f64, f64)> },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("one-parameter subgroup has no limit at this point")]
    NoLimit,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
