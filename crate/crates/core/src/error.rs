use thiserror::Error;

/// Every failure carries the module that raised it and the violated invariant.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("[{module}] invalid argument: {reason}")]
    InvalidArgument { module: &'static str, reason: String },

    #[error("[{module}] dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        module: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("[lattice] degenerate phases: indices {first:?} and {second:?} share phase {phase}")]
    DegeneratePhase {
        first: Vec<i64>,
        second: Vec<i64>,
        phase: f64,
    },

    #[error("[exp_poly] term budget exceeded: {terms} terms > limit {limit}")]
    TermBudgetExceeded { terms: usize, limit: usize },

    #[error("[picard] requested time {requested} exceeds horizon {horizon}")]
    HorizonExceeded { requested: f64, horizon: f64 },

    #[error("[picard] no contraction: empirical ratio >= 1 for 3 consecutive steps (last ratios {ratios:?})")]
    NoContraction { ratios: Vec<f64> },

    #[error("[{module}] time {t} outside [0, {t_max}]")]
    TimeOutOfRange {
        module: &'static str,
        t: f64,
        t_max: f64,
    },

    #[error("[{module}] combinatorial budget exceeded: {reason}")]
    BudgetExceeded { module: &'static str, reason: String },

    #[error("[spectral] unresolved root cluster near E = {energy}: {reason}")]
    UnresolvedRootCluster { energy: f64, reason: String },

    #[error("[uniqueness] inconsistent initial data: max |h(0,n) - c(0,n)| = {max_diff}")]
    InconsistentInitialData { max_diff: f64 },

    #[error("[{module}] field is not Hermitian (max |c(-n) - conj c(n)| = {defect})")]
    NonHermitian { module: &'static str, defect: f64 },

    #[error("[{module}] imaginary part {imag} too large for real-valued field (value {real})")]
    NotRealValued {
        module: &'static str,
        real: f64,
        imag: f64,
    },
}

impl Error {
    pub(crate) fn invalid(module: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            module,
            reason: reason.into(),
        }
    }

    /// Name of the module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::InvalidArgument { module, .. }
            | Error::DimensionMismatch { module, .. }
            | Error::TimeOutOfRange { module, .. }
            | Error::BudgetExceeded { module, .. }
            | Error::NonHermitian { module, .. }
            | Error::NotRealValued { module, .. } => module,
            Error::DegeneratePhase { .. } => "lattice",
            Error::TermBudgetExceeded { .. } => "exp_poly",
            Error::HorizonExceeded { .. } | Error::NoContraction { .. } => "picard",
            Error::UnresolvedRootCluster { .. } => "spectral",
            Error::InconsistentInitialData { .. } => "uniqueness",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
