use srpair_core::certificates::CertificateError;
use srpair_core::green::GreenError;
use srpair_core::periodic::PeriodicError;
use srpair_core::regularity::RegularityError;
use srpair_core::PolyError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("{0}")]
    Negative(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Negative(_) => 1,
            CliError::Input(_) | CliError::Write { .. } => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::TermLimit { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<CertificateError> for CliError {
    fn from(e: CertificateError) -> Self {
        match e {
            CertificateError::ResourceLimit { .. } => CliError::Resource(e.to_string()),
            CertificateError::Poly(p) => p.into(),
            CertificateError::NotJointlyRegular { .. }
            | CertificateError::NotCommuting
            | CertificateError::NotDivisible { .. } => CliError::Negative(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<RegularityError> for CliError {
    fn from(e: RegularityError) -> Self {
        match e {
            RegularityError::Poly(p) => p.into(),
            RegularityError::NoIntegerSolution { .. } => CliError::Negative(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<GreenError> for CliError {
    fn from(e: GreenError) -> Self {
        match e {
            GreenError::Certificate(c) => c.into(),
            GreenError::Poly(p) => p.into(),
            GreenError::Overflow(_) => CliError::Resource(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<PeriodicError> for CliError {
    fn from(e: PeriodicError) -> Self {
        match e {
            PeriodicError::Poly(p) => p.into(),
            PeriodicError::PeriodTooLarge { .. } | PeriodicError::Elimination(_) => {
                CliError::Resource(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}
