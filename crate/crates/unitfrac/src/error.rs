use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("value {n} outside sieve range (limit {limit})")]
    OutOfSieveRange { n: u64, limit: u64 },

    #[error("{0}")]
    InvalidInput(String),

    #[error("no modular inverse of {b} mod {n}")]
    NotInvertible { b: u64, n: u64 },

    #[error(
        "residue {target} mod {modulus} unreachable: pool of {pool_size} primes \
         reaches only {reachable} residue classes"
    )]
    ResidueUnreachable {
        modulus: u64,
        target: u64,
        pool_size: usize,
        reachable: usize,
    },

    #[error("no smooth candidate for s(q) below cap {cap} (q={q}, threshold={threshold:.3})")]
    NoSmoothCandidate { q: u64, threshold: f64, cap: u64 },

    #[error("cleanup stage q={q} failed: {source}")]
    CleanupStage {
        q: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("no subset of the {members} members sums to the target (search exhausted)")]
    NoSubset { members: usize },

    #[error("search budget of {budget} nodes exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("smooth reciprocal sum cannot reach target below cap hi={cap}")]
    SmoothSumInfeasible { cap: u64 },

    #[error("convolution table of {needed} entries exceeds cap {cap}")]
    ConvolutionCapExceeded { needed: u128, cap: u64 },

    #[error("target denominator {denom} does not divide P (prime-power factor above y)")]
    TargetNotSmooth { denom: String },

    #[error("decomposition infeasible at this scale: {0}")]
    Infeasible(String),
}

impl Error {
    /// Stable machine-readable code carried in CLI error reports.
    pub fn reason_code(&self) -> &'static str {
        match self {
            Error::OutOfSieveRange { .. } => "out-of-sieve-range",
            Error::InvalidInput(_) => "invalid-input",
            Error::NotInvertible { .. } => "not-invertible",
            Error::ResidueUnreachable { .. } => "residue-unreachable",
            Error::NoSmoothCandidate { .. } => "no-smooth-candidate",
            Error::CleanupStage { .. } => "cleanup-stage-failed",
            Error::NoSubset { .. } => "no-subset",
            Error::BudgetExceeded { .. } => "search-budget-exceeded",
            Error::SmoothSumInfeasible { .. } => "smooth-sum-infeasible",
            Error::ConvolutionCapExceeded { .. } => "convolution-cap-exceeded",
            Error::TargetNotSmooth { .. } => "target-not-smooth",
            Error::Infeasible(_) => "infeasible",
        }
    }

    /// Usage errors exit 1, everything else documented infeasibility (exit 2).
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidInput(_))
    }
}
