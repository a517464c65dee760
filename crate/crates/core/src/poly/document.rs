//! TOML input documents for maps and pairs of maps.
//!
//! ```toml
//! n = 2
//! vars = ["x", "y"]
//! components = ["y", "y^2 - x"]
//! ```
//!
//! A pair document holds either `[f]` and `[g]` tables, or `[map]` and
//! `[inverse]` tables for an automorphism given with its inverse.

use super::{format_poly, parse_poly, PolyError, PolyMap};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapDocument {
    pub n: usize,
    pub vars: Vec<String>,
    pub components: Vec<String>,
}

impl MapDocument {
    pub fn to_map(&self) -> Result<PolyMap, PolyError> {
        if self.vars.len() != self.n {
            return Err(PolyError::DimensionMismatch {
                expected: self.n,
                found: self.vars.len(),
            });
        }
        if self.components.len() != self.n {
            return Err(PolyError::DimensionMismatch {
                expected: self.n,
                found: self.components.len(),
            });
        }
        for (i, v) in self.vars.iter().enumerate() {
            if self.vars[..i].contains(v) {
                return Err(PolyError::InvalidMap(format!("variable {v:?} listed twice")));
            }
        }
        let comps = self
            .components
            .iter()
            .map(|c| parse_poly(c, &self.vars))
            .collect::<Result<Vec<_>, _>>()?;
        PolyMap::new(comps)
    }

    pub fn from_map(f: &PolyMap, vars: &[String]) -> Self {
        MapDocument {
            n: f.dim(),
            vars: vars.to_vec(),
            components: f.format(vars),
        }
    }

    pub fn parse(src: &str) -> Result<Self, PolyError> {
        toml::from_str(src).map_err(toml_error)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain data serializes")
    }
}

fn toml_error(e: toml::de::Error) -> PolyError {
    PolyError::Parse {
        position: e.span().map(|s| s.start).unwrap_or(0),
        message: e.message().to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<MapDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<MapDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<MapDocument>,
}

/// The maps read from a [`PairDocument`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairInput {
    Pair { f: PolyMap, g: PolyMap, vars: Vec<String> },
    Automorphism { f: PolyMap, f_inv: PolyMap, vars: Vec<String> },
}

impl PairInput {
    pub fn vars(&self) -> &[String] {
        match self {
            PairInput::Pair { vars, .. } | PairInput::Automorphism { vars, .. } => vars,
        }
    }

    /// The two maps as given, `(f, g)` or `(f, f⁻¹)`.
    pub fn maps(&self) -> (&PolyMap, &PolyMap) {
        match self {
            PairInput::Pair { f, g, .. } => (f, g),
            PairInput::Automorphism { f, f_inv, .. } => (f, f_inv),
        }
    }
}

impl PairDocument {
    pub fn parse(src: &str) -> Result<Self, PolyError> {
        toml::from_str(src).map_err(toml_error)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain data serializes")
    }

    pub fn pair(f: &PolyMap, g: &PolyMap, vars: &[String]) -> Self {
        PairDocument {
            f: Some(MapDocument::from_map(f, vars)),
            g: Some(MapDocument::from_map(g, vars)),
            map: None,
            inverse: None,
        }
    }

    pub fn automorphism(f: &PolyMap, f_inv: &PolyMap, vars: &[String]) -> Self {
        PairDocument {
            f: None,
            g: None,
            map: Some(MapDocument::from_map(f, vars)),
            inverse: Some(MapDocument::from_map(f_inv, vars)),
        }
    }

    pub fn to_input(&self) -> Result<PairInput, PolyError> {
        let (a, b, auto) = match (&self.f, &self.g, &self.map, &self.inverse) {
            (Some(f), Some(g), None, None) => (f, g, false),
            (None, None, Some(m), Some(i)) => (m, i, true),
            _ => {
                return Err(PolyError::InvalidMap(
                    "expected either [f] and [g] or [map] and [inverse]".into(),
                ))
            }
        };
        if a.vars != b.vars {
            return Err(PolyError::InvalidMap(
                "both maps must use the same variable names".into(),
            ));
        }
        let f = a.to_map()?;
        let g = b.to_map()?;
        let vars = a.vars.clone();
        Ok(if auto {
            PairInput::Automorphism { f, f_inv: g, vars }
        } else {
            PairInput::Pair { f, g, vars }
        })
    }
}

/// Canonical re-print of a parsed map document.
pub fn canonical(doc: &MapDocument) -> Result<MapDocument, PolyError> {
    let f = doc.to_map()?;
    Ok(MapDocument {
        n: doc.n,
        vars: doc.vars.clone(),
        components: f.components().iter().map(|c| format_poly(c, &doc.vars)).collect(),
    })
}
