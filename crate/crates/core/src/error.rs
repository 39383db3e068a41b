use thiserror::Error;

/// Errors produced by the ratio estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("too few observations: need at least {needed}, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("numerator and denominator lengths differ ({xs} vs {ys})")]
    LengthMismatch { xs: usize, ys: usize },

    #[error("non-finite input value")]
    NonFiniteInput,

    #[error("mean is exactly zero")]
    ZeroMean,

    #[error("value outside its domain: {0}")]
    DomainError(String),

    #[error("denominator mean is zero")]
    ZeroDenominator,

    #[error("numerator mean is zero")]
    ZeroNumerator,

    #[error("variance of the linear contrast is not positive")]
    DegenerateVariance,

    #[error("non-finite result: {0}")]
    NonFiniteResult(String),

    #[error("zero denominator in individual ratio(s) at index {indices:?}")]
    ZeroIndividualDenominator { indices: Vec<usize> },

    #[error("too few observations left after trimming ({remaining})")]
    TooFewAfterTrim { remaining: usize },

    #[error("too few bootstrap replicates: need at least {needed}, got {got}")]
    TooFewReplicates { needed: usize, got: usize },

    #[error("{dropped} of {total} bootstrap resamples produced a non-finite statistic")]
    AllResamplesDegenerate { dropped: usize, total: usize },

    #[error("all jackknife values are equal")]
    DegenerateJackknife,

    #[error("confidence set is empty")]
    EmptyConfidenceSet,

    #[error("covariance matrix of the means is singular")]
    SingularCovariance,

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("log-linear fit requires strictly positive data")]
    NonPositiveData,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
