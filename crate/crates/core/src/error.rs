use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input vector is empty")]
    EmptyInput,

    #[error("grid of degree {grid} cannot represent a series of degree {series}")]
    GridTooSmall { grid: usize, series: usize },

    #[error("cannot truncate a degree {degree} series at degree {requested}")]
    TruncationDegree { requested: usize, degree: usize },

    #[error("point {0} lies outside [-1, 1]")]
    OutOfDomain(f64),

    #[error("sample count must be at least 1")]
    ZeroSamples,

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("budget {budget} cannot cover {nodes} nodes with one sample each")]
    BudgetShortfall { budget: usize, nodes: usize },

    #[error("all noise levels are zero; proportional allocation is undefined")]
    AllZeroWeights,

    #[error(
        "pre-sample size m = floor(r*N/(N_hat+1)) = {m} is below 2 \
         (N = {budget}, N_hat = {n_hat}, r = {r}); lower N_hat or raise r"
    )]
    PreSampleTooSmall { m: usize, budget: usize, n_hat: usize, r: f64 },

    #[error("degrees must satisfy n <= N_hat <= N (n = {n}, N_hat = {n_hat}, N = {big_n})")]
    InconsistentDegrees { n: usize, n_hat: usize, big_n: usize },

    #[error("invalid {name}: {reason}")]
    InvalidArgument { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument { name, reason: reason.into() }
    }
}
