use thiserror::Error;

/// Failures raised by the solvers and evaluators in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("bracket [{lo}, {hi}] does not straddle a change of outcome")]
    Bracket { lo: f64, hi: f64 },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("grid index {index} out of range (len {len})")]
    Index { index: usize, len: usize },

    #[error("{name}: dual forms disagree, relative discrepancy {discrepancy:e} > {bound:e}")]
    IdentityViolation { name: &'static str, discrepancy: f64, bound: f64 },

    #[error("screening length eps = {0} must be positive and finite")]
    EpsOutOfRange(f64),

    #[error("zero pivot in tridiagonal elimination at row {0}")]
    SingularSystem(usize),

    #[error("quadrature budget exceeded: {0}")]
    QuadratureBudgetExceeded(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("step size underflow at t = {t:e} (h = {h:e}, L = {l:e})")]
    StepUnderflow { t: f64, h: f64, l: f64 },

    #[error("no closed first integral for order {0}")]
    UnsupportedOrder(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
