use thiserror::Error;

/// Errors produced by the CMF pipeline and the exact oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("invalid coupling family parameter: {0}")]
    InvalidFamilyParameter(String),
    #[error("coupling table is not symmetric: {0}")]
    SymmetryViolation(String),
    #[error("couplings outside the treated attractive anisotropic regime: {0}")]
    OutsideTreatedRegime(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("couplings do not admit a factorizing field: {0}")]
    NotFactorizable(String),
    #[error("frequency {omega} hits a pole of the local response")]
    PoleHit { omega: f64 },
    #[error("RPA matrix has complex eigenvalues at mode {k}")]
    ComplexEigenvalue { k: usize },
    #[error("negative RPA radicand {radicand:e} at mode {k}")]
    RpaInstability { k: usize, radicand: f64 },
    #[error("non-positive static determinant {value:e} at mode {k}")]
    StaticInstability { k: usize, value: f64 },
    #[error("analytic derivative disagrees with finite differences: {0}")]
    DerivativeMismatch(String),
    #[error("concurrence C_{j} is not positive at T = 0")]
    NoPositiveConcurrence { j: usize },
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("convolution series diverges: chi * max r_k = {0}")]
    SeriesDivergence(f64),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("Jordan-Wigner solver needs a nearest-neighbor XY chain: {0}")]
    NotNearestNeighbor(String),
}

pub type Result<T> = std::result::Result<T, Error>;
