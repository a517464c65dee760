//! Naive and canonical heights of rational points.
//!
//! The canonical height of a pair is `Σ_v max(G_{f,v}, G_{g,v})` over the
//! places of ℚ. Only the archimedean place, the bad primes and the primes
//! in the denominators of the point can contribute; everywhere else the
//! point is integral and the pair has good reduction, so the local term is
//! exactly zero.

use crate::arith::{lcm_denominators, ln_bigint_abs};
use crate::green::{
    green_eval, green_pair, AnalyzedPair, ErrorBound, GreenError, GreenOptions, GreenValue, Member,
};
use crate::place::Place;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Coprime integer coordinates `[x0 : x1 : … : xn]` and `log max |xi|`.
#[derive(Clone, Debug, PartialEq)]
pub struct NaiveHeight {
    pub coords: Vec<BigInt>,
    pub max: BigInt,
    pub value: f64,
}

pub fn naive_height(x: &[BigRational]) -> NaiveHeight {
    let l = lcm_denominators(x.iter());
    let mut coords = vec![l.clone()];
    coords.extend(x.iter().map(|c| c.numer() * (&l / c.denom())));
    let max = coords
        .iter()
        .map(|c| c.abs())
        .fold(BigInt::zero(), |a, b| if b > a { b } else { a });
    NaiveHeight {
        value: ln_bigint_abs(&max),
        coords,
        max,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalTerm {
    pub place: Place,
    pub green: GreenValue,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeightValue {
    pub value: f64,
    pub error: ErrorBound,
    /// Sorted by place, archimedean first.
    pub places: Vec<LocalTerm>,
}

impl HeightValue {
    pub fn is_rigorous(&self) -> bool {
        self.error.is_rigorous()
    }
}

fn places_for(pair: &AnalyzedPair, x: &[BigRational]) -> Result<Vec<Place>, GreenError> {
    let mut places = vec![Place::Archimedean];
    places.extend(pair.contributing_primes(x)?.into_iter().map(Place::Finite));
    Ok(places)
}

/// Half the tolerance goes to the archimedean place, the rest is shared
/// equally by the finite places.
fn split_tolerance(tol: f64, places: &[Place]) -> Vec<f64> {
    let finite = places.iter().filter(|p| p.prime().is_some()).count();
    places
        .iter()
        .map(|p| match p {
            Place::Archimedean => tol / 2.0,
            Place::Finite(_) => tol / 2.0 / finite as f64,
        })
        .collect()
}

fn sum_terms(places: Vec<LocalTerm>) -> HeightValue {
    let value = places.iter().map(|t| t.green.value).sum();
    let total: f64 = places.iter().map(|t| t.green.error.value()).sum();
    let error = if places.iter().all(|t| t.green.is_rigorous()) {
        ErrorBound::Rigorous(total)
    } else {
        ErrorBound::Heuristic(total)
    };
    HeightValue {
        value,
        error,
        places,
    }
}

fn local_sum(
    pair: &AnalyzedPair,
    x: &[BigRational],
    opts: &GreenOptions,
    eval: impl Fn(Place, &GreenOptions) -> Result<GreenValue, GreenError>,
) -> Result<HeightValue, GreenError> {
    if !(opts.tol > 0.0) {
        return Err(GreenError::BadTolerance(opts.tol));
    }
    let places = places_for(pair, x)?;
    let tols = split_tolerance(opts.tol, &places);
    let mut terms = Vec::with_capacity(places.len());
    for (place, tol) in places.into_iter().zip(tols) {
        let o = GreenOptions { tol, ..*opts };
        terms.push(LocalTerm {
            place,
            green: eval(place, &o)?,
        });
    }
    Ok(sum_terms(terms))
}

/// `Σ_v max(G_{f,v}(X), G_{g,v}(X))` with total error at most `opts.tol`
/// when every local term is rigorous.
pub fn canonical_height_pair(
    pair: &AnalyzedPair,
    x: &[BigRational],
    opts: &GreenOptions,
) -> Result<HeightValue, GreenError> {
    local_sum(pair, x, opts, |place, o| green_pair(pair, x, place, o))
}

/// `Σ_v G_{f,v}(X)` for the first member, which satisfies
/// `h(f(X)) = deg f · h(X)`.
pub fn canonical_height_forward(
    pair: &AnalyzedPair,
    x: &[BigRational],
    opts: &GreenOptions,
) -> Result<HeightValue, GreenError> {
    local_sum(pair, x, opts, |place, o| green_eval(pair, Member::First, x, place, o))
}
