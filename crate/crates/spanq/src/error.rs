use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("malformed span program: {0}")]
    MalformedProgram(String),
    #[error("input is not accepted by the span program")]
    NotAccepted,
    #[error("input is not rejected by the span program")]
    NotRejected,
    #[error("target lies outside the column space of A")]
    DegenerateTarget,
    #[error("target is not reachable by any witness")]
    TargetUnreachable,
    #[error("error budget {budget:e} is below the minimal error {min_error:e}")]
    InfeasibleBudget { budget: f64, min_error: f64 },
    #[error("program is not normalized: ‖A⁺τ‖² = {norm_sq}")]
    NotNormalized { norm_sq: f64 },
    #[error("program is already real")]
    AlreadyReal,
    #[error("program does not approximate the function: {0}")]
    NotApproximating(String),
    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("state is not normalized (norm² = {norm_sq})")]
    StateNotNormalized { norm_sq: f64 },
    #[error("state has weight {weight:e} on phases with |θ| ≤ {limit}")]
    SupportViolation { weight: f64, limit: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("κ = {kappa} is too large; enable reduction")]
    KappaTooLarge { kappa: f64 },
    #[error("algorithm is not bounded-error: {0}")]
    NotBoundedError(String),
    #[error("input has zero rejection probability")]
    ZeroRejection,
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("not monotone: {0}")]
    NotMonotone(String),
    #[error("no eigenmass at phase zero")]
    NoZeroEigenmass,
    #[error("bound violated for input {input}: {quantity}")]
    BoundViolated { input: String, quantity: String },
    #[error("invalid cover: {0}")]
    CoverInvalid(String),
    #[error("assignment {0} is not a certificate")]
    NotACertificate(usize),
    #[error("assignments do not cover the cube: {0}")]
    NotCovering(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code: 2 validation, 3 bound violation, 4 io/parse.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BoundViolated { .. } | Error::SupportViolation { .. } => 3,
            Error::Io(_) | Error::Parse(_) => 4,
            _ => 2,
        }
    }
}
