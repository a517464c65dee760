//! Exact sparse multivariate polynomials over ℚ and polynomial maps.
//!
//! A [`MultiPoly`] is a finite map from exponent vectors to nonzero rational
//! coefficients. Exponent vectors are kept in a `BTreeMap`, so iteration
//! order (and therefore every printed or exported form) is deterministic.

mod document;
mod map;
mod parse;

pub use document::{canonical, MapDocument, PairDocument, PairInput};
pub use map::{degree_sequence, homogeneous_vars, DegreeSequence, HomogMap, PolyMap};
pub use map::default_vars;
pub use parse::{format_poly, parse_poly};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, Mul};
use thiserror::Error;

pub type Exponents = Vec<u32>;

/// Default limit on the number of terms any single polynomial may hold.
pub const DEFAULT_TERM_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("polynomial with {terms} terms exceeds the cap of {cap}")]
    TermLimit { terms: usize, cap: usize },
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("invalid map: {0}")]
    InvalidMap(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    n_vars: usize,
    terms: BTreeMap<Exponents, BigRational>,
}

impl MultiPoly {
    pub fn zero(n_vars: usize) -> Self {
        MultiPoly {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(n_vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; n_vars], c);
        }
        p
    }

    pub fn one(n_vars: usize) -> Self {
        Self::constant(n_vars, BigRational::one())
    }

    /// The variable `x_i`.
    pub fn var(n_vars: usize, i: usize) -> Self {
        let mut e = vec![0; n_vars];
        e[i] = 1;
        Self::monomial(e, BigRational::one())
    }

    pub fn monomial(exps: Exponents, c: BigRational) -> Self {
        let mut p = Self::zero(exps.len());
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// Builds a polynomial from (exponents, coefficient) pairs, summing
    /// repeated exponents and dropping zeros.
    pub fn from_terms(
        n_vars: usize,
        terms: impl IntoIterator<Item = (Exponents, BigRational)>,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(n_vars);
        for (e, c) in terms {
            if e.len() != n_vars {
                return Err(PolyError::DimensionMismatch {
                    expected: n_vars,
                    found: e.len(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Exponents, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &BigRational> {
        self.terms.values()
    }

    pub fn coefficient(&self, e: &[u32]) -> BigRational {
        self.terms.get(e).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[var]).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|k| k == d),
        }
    }

    /// The sum of the terms of total degree exactly `k`.
    pub fn homogeneous_component(&self, k: u32) -> Self {
        MultiPoly {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() == k)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn max_abs_coefficient(&self) -> BigRational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    /// Sum of absolute values of the coefficients.
    pub fn l1_norm(&self) -> BigRational {
        self.terms
            .values()
            .fold(BigRational::zero(), |acc, c| acc + c.abs())
    }

    pub fn neg(&self) -> Self {
        self.map_coefficients(|c| -c)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Self::zero(self.n_vars);
        }
        self.map_coefficients(|c| c * s)
    }

    fn map_coefficients(&self, f: impl Fn(&BigRational) -> BigRational) -> Self {
        MultiPoly {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), f(c))).collect(),
        }
    }

    fn check_same(&self, other: &Self) -> Result<(), PolyError> {
        if self.n_vars != other.n_vars {
            return Err(PolyError::DimensionMismatch {
                expected: self.n_vars,
                found: other.n_vars,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.mul_capped(other, DEFAULT_TERM_CAP)
    }

    pub fn mul_capped(&self, other: &Self, cap: usize) -> Result<Self, PolyError> {
        self.check_same(other)?;
        let mut out = Self::zero(self.n_vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
            if out.terms.len() > cap {
                return Err(PolyError::TermLimit {
                    terms: out.terms.len(),
                    cap,
                });
            }
        }
        Ok(out)
    }

    pub fn pow_capped(&self, k: u32, cap: usize) -> Result<Self, PolyError> {
        let mut result = Self::one(self.n_vars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul_capped(&base, cap)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_capped(&base, cap)?;
            }
        }
        Ok(result)
    }

    /// Multiply by the monomial `x^e` (same number of variables).
    pub fn shift(&self, e: &[u32]) -> Self {
        MultiPoly {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(ex, c)| (ex.iter().zip(e).map(|(a, b)| a + b).collect(), c.clone()))
                .collect(),
        }
    }

    /// Exact division by `x_var^k`; `None` if some term is not divisible.
    pub fn divide_by_var_power(&self, var: usize, k: u32) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[var] < k {
                return None;
            }
            let mut e = e.clone();
            e[var] -= k;
            terms.insert(e, c.clone());
        }
        Some(MultiPoly {
            n_vars: self.n_vars,
            terms,
        })
    }

    /// Terms not involving `x_var`, i.e. the polynomial with `x_var = 0`.
    pub fn set_var_zero(&self, var: usize) -> Self {
        MultiPoly {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[var] == 0)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Re-embed into `new_n` variables, sending variable `i` to `i + offset`.
    pub fn embed(&self, new_n: usize, offset: usize) -> Self {
        MultiPoly {
            n_vars: new_n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut ne = vec![0; new_n];
                    ne[offset..offset + e.len()].copy_from_slice(e);
                    (ne, c.clone())
                })
                .collect(),
        }
    }

    /// Remove variable `var` by substituting `value` for it.
    pub fn specialize(&self, var: usize, value: &BigRational) -> Self {
        let mut out = Self::zero(self.n_vars - 1);
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            let k = ne.remove(var);
            out.add_term(ne, c * value.pow(k as i32));
        }
        out
    }

    pub fn eval(&self, point: &[BigRational]) -> Result<BigRational, PolyError> {
        if point.len() != self.n_vars {
            return Err(PolyError::DimensionMismatch {
                expected: self.n_vars,
                found: point.len(),
            });
        }
        Ok(self.eval_with(point, BigRational::zero(), BigRational::one(), |c| {
            c.clone()
        }))
    }

    /// Evaluate in any commutative ring given its zero, its one and a lift
    /// of rational coefficients. The point length must equal `n_vars`.
    pub fn eval_with<T>(&self, point: &[T], zero: T, one: T, lift: impl Fn(&BigRational) -> T) -> T
    where
        T: Clone + Add<Output = T> + Mul<Output = T>,
    {
        let mut powers = PowerCache::new(point, one.clone());
        let mut acc = zero;
        for (e, c) in &self.terms {
            let mut t = lift(c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t * powers.get(i, k);
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Like [`eval_with`](Self::eval_with) but returns the partial sums for
    /// each total degree `0..=deg`.
    pub fn eval_graded<T>(
        &self,
        point: &[T],
        zero: T,
        one: T,
        lift: impl Fn(&BigRational) -> T,
    ) -> Vec<T>
    where
        T: Clone + Add<Output = T> + Mul<Output = T>,
    {
        let deg = self.total_degree().unwrap_or(0) as usize;
        let mut powers = PowerCache::new(point, one.clone());
        let mut acc = vec![zero; deg + 1];
        for (e, c) in &self.terms {
            let mut t = lift(c);
            let mut k_tot = 0usize;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t * powers.get(i, k);
                    k_tot += k as usize;
                }
            }
            acc[k_tot] = acc[k_tot].clone() + t;
        }
        acc
    }

    /// Substitute `subs[i]` for variable `i`. All substitutes must share one
    /// variable count, which becomes the variable count of the result.
    pub fn compose(&self, subs: &[MultiPoly], cap: usize) -> Result<MultiPoly, PolyError> {
        if subs.len() != self.n_vars {
            return Err(PolyError::DimensionMismatch {
                expected: self.n_vars,
                found: subs.len(),
            });
        }
        let m = subs.first().map(|s| s.n_vars).unwrap_or(0);
        if let Some(bad) = subs.iter().find(|s| s.n_vars != m) {
            return Err(PolyError::DimensionMismatch {
                expected: m,
                found: bad.n_vars,
            });
        }
        let mut powers: Vec<Vec<MultiPoly>> = vec![vec![MultiPoly::one(m)]; self.n_vars];
        let mut out = MultiPoly::zero(m);
        for (e, c) in &self.terms {
            let mut t = MultiPoly::constant(m, c.clone());
            for (i, &k) in e.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap().mul_capped(&subs[i], cap)?;
                    powers[i].push(next);
                }
                if k > 0 {
                    t = t.mul_capped(&powers[i][k as usize], cap)?;
                }
            }
            for (te, tc) in t.terms {
                out.add_term(te, tc);
            }
            if out.terms.len() > cap {
                return Err(PolyError::TermLimit {
                    terms: out.terms.len(),
                    cap,
                });
            }
        }
        Ok(out)
    }

    /// Content-free integer multiple: the lcm of denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        crate::arith::lcm_denominators(self.terms.values())
    }
}

struct PowerCache<'a, T> {
    point: &'a [T],
    cache: Vec<Vec<T>>,
}

impl<'a, T: Clone + Mul<Output = T>> PowerCache<'a, T> {
    fn new(point: &'a [T], one: T) -> Self {
        PowerCache {
            point,
            cache: vec![vec![one]; point.len()],
        }
    }

    fn get(&mut self, i: usize, k: u32) -> T {
        let row = &mut self.cache[i];
        while row.len() <= k as usize {
            let next = row.last().unwrap().clone() * self.point[i].clone();
            row.push(next);
        }
        row[k as usize].clone()
    }
}
