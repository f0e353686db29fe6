use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("tolerance not met: {0}")]
    ToleranceNotMet(String),
    #[error("pole of the gamma function at {0}")]
    Pole(String),
    #[error("series diverged: {0}")]
    Divergence(String),
    #[error("step size collapsed: {0}")]
    Stiffness(String),
    #[error("initialization error: {0}")]
    Initialization(String),
    #[error("degenerate matching system: {0}")]
    DegenerateMatching(String),
    #[error("oscillatory quadrature failure: {0}")]
    OscillatoryQuadrature(String),
    #[error("non-integrable: {0}")]
    NonIntegrable(String),
    #[error("non-monotone data: {0}")]
    NonMonotone(String),
    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad inputs rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::InvalidParameter(_)
                | Error::Pole(_)
                | Error::Initialization(_)
                | Error::NonIntegrable(_)
                | Error::NonMonotone(_)
                | Error::InsufficientData(_)
                | Error::Parse(_)
                | Error::Io(_)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::ToleranceNotMet(_) => "tolerance_not_met",
            Error::Pole(_) => "pole",
            Error::Divergence(_) => "divergence",
            Error::Stiffness(_) => "stiffness",
            Error::Initialization(_) => "initialization",
            Error::DegenerateMatching(_) => "degenerate_matching",
            Error::OscillatoryQuadrature(_) => "oscillatory_quadrature",
            Error::NonIntegrable(_) => "non_integrable",
            Error::NonMonotone(_) => "non_monotone",
            Error::IllConditioned(_) => "ill_conditioned",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
