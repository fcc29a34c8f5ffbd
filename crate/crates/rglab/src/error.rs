use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("coalescence undefined for equal sites")]
    EqualSites,
    #[error("final covariance needs positive mass")]
    FinalNeedsMass,
    #[error("bubble diverges")]
    BubbleDiverges,
    #[error("green function diverges (d <= 2 at zero mass)")]
    GreenDiverges,
    #[error("partition enumeration cap: order {0} exceeds 8")]
    PartitionCap(usize),
    #[error("covariance not positive semi-definite: eigenvalue {0}")]
    NotPsd(f64),
    #[error("bracket does not straddle criticality")]
    NoBracket,
    #[error("did not converge: {0}")]
    NonConvergent(String),
    #[error("numerical gate failed: {0}")]
    Gate(String),
    #[error("refused: {0}")]
    Refused(String),
}

pub type Result<T> = std::result::Result<T, Error>;
