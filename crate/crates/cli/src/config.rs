use crate::error::CliError;
use srpair_core::green::Precision;
use srpair_core::Place;
use std::path::PathBuf;
use std::str::FromStr;

/// Environment variable consulted when `--prec` is not given.
pub const PREC_ENV: &str = "SRPAIR_PREC";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlaceSelector {
    Arch,
    Prime(u64),
    /// The archimedean place and every prime that can contribute at the point.
    All,
}

impl FromStr for PlaceSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "all" => Ok(PlaceSelector::All),
            t => match t.parse::<Place>().map_err(|e| e.to_string())? {
                Place::Archimedean => Ok(PlaceSelector::Arch),
                Place::Finite(p) => Ok(PlaceSelector::Prime(p)),
            },
        }
    }
}

/// Settings shared by every subcommand.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub tol: f64,
    /// Cap on the certificate degree `M`.
    pub mmax: Option<u32>,
    /// Algebraic stability is checked up to this iterate.
    pub m_max: u32,
    pub n_cap: u32,
    pub iter_cap: Option<u32>,
    pub place: PlaceSelector,
    pub precision: Precision,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0) {
            return Err(CliError::Input(format!("--tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// `--prec` if given, then the environment, then hardware floats.
pub fn resolve_precision(flag: Option<&str>) -> Result<Precision, CliError> {
    let env = std::env::var(PREC_ENV).ok();
    match flag.or(env.as_deref()) {
        None => Ok(Precision::default()),
        Some(s) => s.parse().map_err(CliError::Input),
    }
}

/// `3..6` (inclusive), `3,4,5` or a single period.
pub fn parse_n_list(s: &str) -> Result<Vec<u32>, String> {
    let bad = || format!("bad period list {s:?}");
    let out: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if out.is_empty() || out.contains(&0) || out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad());
    }
    Ok(out)
}
