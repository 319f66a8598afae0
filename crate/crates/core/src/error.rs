use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid single-atom state: {0}")]
    InvalidTlaState(String),
    #[error("not a density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("exchange factor |g| = {0} exceeds 1 (rate matrix not positive semidefinite)")]
    ExchangeOutOfRange(f64),
    #[error("expected a {expected:?}-picture superoperator")]
    WrongPicture { expected: crate::liouvillian::Picture },
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error(
        "generator has no dark state (stationary kernel dimension {kernel_dim}); \
         the quasi-stationary map needs |g| = 1, use `evolve` with 1/γ << t << 1/((1-g)γ) instead"
    )]
    NoDarkState { kernel_dim: usize },
    #[error("quasi-stationary methods disagree: projector vs resolvent {resolvent:.3e}, projector vs long-time {long_time:.3e}")]
    MethodDisagreement { resolvent: f64, long_time: f64 },
    #[error("quadrature did not converge (last refinement changed the result by {0:.3e})")]
    Quadrature(f64),
    #[error("ODE step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
