use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("spectrum invalid: {0}")]
    SpectrumInvalid(String),

    #[error("eigenvalues sum to {sum}, outside tolerance {tol} of 1")]
    SumOutOfTolerance { sum: f64, tol: f64 },

    #[error("eigenvalue {value} is negative beyond tolerance {tol}")]
    NegativeEigenvalue { value: f64, tol: f64 },

    #[error("hermitian eigensolver did not converge")]
    EigensolverFailure,

    #[error("beta below beta_minus=-2/27 (beta={beta}): no real positive-density solution")]
    BelowBetaMinus { beta: f64 },

    #[error("|beta/beta_minus| = {ratio} outside the radius of convergence")]
    OutsideConvergence { ratio: f64 },

    #[error("adaptive quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("cumulant order {order} unsupported for mu={mu}")]
    UnsupportedOrder { order: u32, mu: String },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("series of length {len} too short (need at least {min})")]
    SeriesTooShort { len: usize, min: usize },

    #[error("{count} samples are too few for order {order} (need at least {min})")]
    TooFewSamples { count: usize, order: u32, min: usize },

    #[error("empty input")]
    EmptyInput,
}
