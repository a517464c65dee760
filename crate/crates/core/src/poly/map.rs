use super::{format_poly, MultiPoly, PolyError, DEFAULT_TERM_CAP};
use num_rational::BigRational;
use num_traits::One;
use std::fmt;

/// A polynomial self-map of affine n-space over ℚ.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyMap {
    components: Vec<MultiPoly>,
}

impl PolyMap {
    /// Components must all live in `components.len()` variables and the map
    /// must have degree at least one.
    pub fn new(components: Vec<MultiPoly>) -> Result<Self, PolyError> {
        let n = components.len();
        if n == 0 {
            return Err(PolyError::InvalidMap("a map needs at least one component".into()));
        }
        if let Some(c) = components.iter().find(|c| c.n_vars() != n) {
            return Err(PolyError::DimensionMismatch {
                expected: n,
                found: c.n_vars(),
            });
        }
        let m = PolyMap { components };
        if m.degree() == 0 {
            return Err(PolyError::InvalidMap("constant map".into()));
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        PolyMap {
            components: (0..n).map(|i| MultiPoly::var(n, i)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[MultiPoly] {
        &self.components
    }

    pub fn degree(&self) -> u32 {
        self.components
            .iter()
            .filter_map(|c| c.total_degree())
            .max()
            .unwrap_or(0)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim())
    }

    pub fn eval(&self, point: &[BigRational]) -> Result<Vec<BigRational>, PolyError> {
        self.components.iter().map(|c| c.eval(point)).collect()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PolyMap) -> Result<PolyMap, PolyError> {
        self.compose_capped(inner, DEFAULT_TERM_CAP)
    }

    pub fn compose_capped(&self, inner: &PolyMap, cap: usize) -> Result<PolyMap, PolyError> {
        if self.dim() != inner.dim() {
            return Err(PolyError::DimensionMismatch {
                expected: self.dim(),
                found: inner.dim(),
            });
        }
        let components = self
            .components
            .iter()
            .map(|c| c.compose(&inner.components, cap))
            .collect::<Result<Vec<_>, _>>()?;
        // Composition of nonconstant maps can collapse to a constant map only
        // in degenerate inputs; keep the raw result either way.
        Ok(PolyMap { components })
    }

    /// `self^m` for `m ≥ 1`.
    pub fn iterate(&self, m: u32) -> Result<PolyMap, PolyError> {
        self.iterate_capped(m, DEFAULT_TERM_CAP)
    }

    pub fn iterate_capped(&self, m: u32, cap: usize) -> Result<PolyMap, PolyError> {
        let mut out = PolyMap::identity(self.dim());
        for _ in 0..m {
            out = self.compose_capped(&out, cap)?;
        }
        Ok(out)
    }

    pub fn homogenize(&self) -> HomogMap {
        HomogMap::from_affine(self)
    }

    pub fn format(&self, vars: &[String]) -> Vec<String> {
        self.components.iter().map(|c| format_poly(c, vars)).collect()
    }

    pub fn default_vars(&self) -> Vec<String> {
        default_vars(self.dim())
    }
}

pub fn default_vars(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

impl fmt::Display for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.format(&self.default_vars()).join(", "))
    }
}

/// Projective form `[X0^d : F1 : … : Fn]` of a polynomial map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogMap {
    degree: u32,
    components: Vec<MultiPoly>,
}

impl HomogMap {
    pub fn from_affine(f: &PolyMap) -> Self {
        let n = f.dim();
        let d = f.degree();
        let mut components = Vec::with_capacity(n + 1);
        let mut e0 = vec![0; n + 1];
        e0[0] = d;
        components.push(MultiPoly::monomial(e0, BigRational::one()));
        for c in f.components() {
            let terms = c.terms().map(|(e, coef)| {
                let mut he = Vec::with_capacity(n + 1);
                he.push(d - e.iter().sum::<u32>());
                he.extend_from_slice(e);
                (he, coef.clone())
            });
            components.push(MultiPoly::from_terms(n + 1, terms).expect("lengths match"));
        }
        HomogMap { degree: d, components }
    }

    pub fn dim(&self) -> usize {
        self.components.len() - 1
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// All `n + 1` components, index 0 being `X0^d`.
    pub fn components(&self) -> &[MultiPoly] {
        &self.components
    }

    /// `F_1, …, F_n`.
    pub fn affine_components(&self) -> &[MultiPoly] {
        &self.components[1..]
    }

    /// Set `X0 = 1`.
    pub fn dehomogenize(&self) -> Result<PolyMap, PolyError> {
        let one = BigRational::one();
        PolyMap::new(
            self.components[1..]
                .iter()
                .map(|c| c.specialize(0, &one))
                .collect(),
        )
    }

    /// Components with `X0 = 0`, i.e. the top-degree forms at infinity.
    pub fn at_infinity(&self) -> Vec<MultiPoly> {
        self.components[1..]
            .iter()
            .map(|c| c.set_var_zero(0))
            .collect()
    }

    /// `F_i(G_0, …, G_n)` for `i = 0..=n`, where `self = F` and `inner = G`.
    pub fn compose(&self, inner: &HomogMap, cap: usize) -> Result<Vec<MultiPoly>, PolyError> {
        self.components
            .iter()
            .map(|c| c.compose(&inner.components, cap))
            .collect()
    }

    pub fn format(&self) -> Vec<String> {
        let vars = homogeneous_vars(self.dim());
        self.components.iter().map(|c| format_poly(c, &vars)).collect()
    }
}

/// `X0, X1, …, Xn`.
pub fn homogeneous_vars(n: usize) -> Vec<String> {
    (0..=n).map(|i| format!("X{i}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeSequence {
    /// `deg f, deg f², …` for as many iterates as were computed.
    pub degrees: Vec<u32>,
    /// Set when the term cap stopped the computation early.
    pub truncated: Option<PolyError>,
}

/// Degrees of `f, f², …, f^{m_max}` by symbolic composition.
pub fn degree_sequence(f: &PolyMap, m_max: u32, cap: usize) -> DegreeSequence {
    let mut degrees = Vec::new();
    let mut it = f.clone();
    for m in 1..=m_max {
        if m > 1 {
            match f.compose_capped(&it, cap) {
                Ok(next) => it = next,
                Err(e) => {
                    return DegreeSequence {
                        degrees,
                        truncated: Some(e),
                    }
                }
            }
        }
        degrees.push(it.degree());
    }
    DegreeSequence {
        degrees,
        truncated: None,
    }
}
