use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("negative density {value:e} at x = {at}")]
    NegativeDensity { at: f64, value: f64 },
    #[error("total mass {total} differs from 1 by more than the mass tolerance")]
    MassMismatch { total: f64 },
    #[error("pieces [{lo1}, {hi1}) and [{lo2}, {hi2}) overlap")]
    OverlappingPieces { lo1: f64, hi1: f64, lo2: f64, hi2: f64 },
    #[error("density has infinite mass on [{lo}, {hi})")]
    InfiniteMass { lo: f64, hi: f64 },
    #[error("mean is infinite")]
    InfiniteMean,
    #[error("truncation window [{lo}, {hi}] carries no probability")]
    EmptyTruncation { lo: f64, hi: f64 },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("not a cdf: {0}")]
    NotACdf(String),
    #[error("zero evidence when conditioning on {0}")]
    ZeroEvidence(String),
    #[error("cutoffs must satisfy z1 < z2 (got {z1}, {z2})")]
    BadCutoffs { z1: f64, z2: f64 },
    #[error("prior support is not an interval: {0}")]
    NotAnInterval(String),
    #[error("zero density at z = {z}, x = {x}")]
    ZeroDensity { z: f64, x: f64 },
    #[error("log-density slope is not eventually nondecreasing on the probed range")]
    NoThreshold,
    #[error("Monte Carlo acceptance rate {rate:e} is below the starvation floor")]
    AcceptanceStarved { rate: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
