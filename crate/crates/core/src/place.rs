use crate::arith::is_prime;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// A place of ℚ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Place {
    Archimedean,
    Finite(u64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid place {0:?}: expected \"arch\" or a prime")]
pub struct PlaceParseError(pub String);

impl Place {
    pub fn finite(p: u64) -> Result<Self, PlaceParseError> {
        if is_prime(p) {
            Ok(Place::Finite(p))
        } else {
            Err(PlaceParseError(p.to_string()))
        }
    }

    pub fn prime(&self) -> Option<u64> {
        match self {
            Place::Archimedean => None,
            Place::Finite(p) => Some(*p),
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Archimedean => write!(f, "arch"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = PlaceParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "arch" | "inf" | "infinity" => Ok(Place::Archimedean),
            t => {
                let p: u64 = t.parse().map_err(|_| PlaceParseError(s.to_string()))?;
                Place::finite(p)
            }
        }
    }
}
