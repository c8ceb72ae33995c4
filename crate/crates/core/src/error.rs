use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised anywhere in the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("not Hermitian: max |m - m†| = {deviation:e} exceeds {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("not positive semidefinite: min eigenvalue {min_eigenvalue:e} below -{tol:e}")]
    NotPositive { min_eigenvalue: f64, tol: f64 },

    #[error("trace {trace} differs from 1 by more than {tol:e}")]
    TraceNotOne { trace: f64, tol: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    EigenFailure { sweeps: usize },

    #[error("state has empty support")]
    EmptySupport,

    #[error("matrix norm {norm:e} beyond supported exponential range {limit:e}")]
    OverflowRisk { norm: f64, limit: f64 },

    #[error("linear system is singular")]
    Singular,

    #[error("syntax error at byte {offset}: expected one of {expected:?}, found {found}")]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },

    #[error("unknown identifier `{name}`")]
    UnknownIdentifier { name: String },

    #[error("unknown parameter `{name}`")]
    UnknownParameter { name: String },

    #[error("parameter `{name}` has no value at this point")]
    MissingParameter { name: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid state at evaluation point: {0}")]
    InvalidState(Box<Error>),

    #[error("evaluation error: {0}")]
    EvalError(String),

    #[error("finite difference for `{name}` at {value} with step {step:e} leaves domain [{lo}, {hi}]")]
    DomainEdge {
        name: String,
        value: f64,
        step: f64,
        lo: f64,
        hi: f64,
    },

    #[error("derivative leaks into the kernel-kernel block ({leak:e} > {tol:e}); rank is not locally constant")]
    RankDrift { leak: f64, tol: f64 },

    #[error("defining-equation residual {residual:e} exceeds {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("no convergence: {reason} (last {last:e}, previous {previous:e})")]
    NoConvergence {
        reason: &'static str,
        last: f64,
        previous: f64,
    },

    #[error("series unstable: s * p_max = {s_pmax} exceeds {limit}")]
    UnstableRegime { s_pmax: f64, limit: f64 },

    #[error("state is not full rank (smallest pivot {min_pivot:e})")]
    NotFullRank { min_pivot: f64 },

    #[error("state does not commute with its derivative: |[rho, drho]| = {norm:e} > {tol:e}")]
    NotCommuting { norm: f64, tol: f64 },

    #[error("quadratic-class relation violated: residual {residual:e} > {tol:e}")]
    ClassViolation { residual: f64, tol: f64 },

    #[error("Bloch vector norm {norm} exceeds 1")]
    InvalidBloch { norm: f64 },

    #[error("matrix is not unitary: max |U†U - 1| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("channel reliability {eta} outside [0, 1]")]
    EtaOutOfRange { eta: f64 },

    #[error("channel reliability {eta} too close to the boundary of (0, 1)")]
    EtaBoundary { eta: f64 },

    #[error("derivative couples distinct blocks ({leak:e})")]
    BlockMismatch { leak: f64 },

    #[error("two-level formula needs a mixed state, purity {purity} is too close to 1")]
    PurityBoundary { purity: f64 },

    #[error(
        "outcome {outcome} has probability {probability:e} but derivative {derivative:e}; Fisher information diverges"
    )]
    SingularOutcome {
        outcome: usize,
        probability: f64,
        derivative: f64,
    },

    #[error("true value {value} lies within 1% of the domain edge [{lo}, {hi}]")]
    DomainTooNarrow { value: f64, lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
