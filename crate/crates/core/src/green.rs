//! Local Green functions `G_{f,v}(X) = lim d^{-m} log⁺‖f^m(X)‖_v` of the
//! members of a jointly regular pair, and the pair potential
//! `max(G_f, G_g)`.
//!
//! Once an orbit is inside the escape region `V` of its own map, every step
//! satisfies `|ℓ_{m+1} − d·ℓ_m| ≤ M` with `ℓ = log⁺‖·‖`, so the partial value
//! `ℓ_m / d^m` is within `M / (d^m (d − 1))` of the limit. `M` is assembled
//! from the certificate constants `ε, δ`, the growth constant `C2` of the map
//! and, when known, of its inverse.

use crate::arith::{ln_abs_rational, padic_abs, reduce_mod_p, to_f64, valuation, ArithError};
use crate::certificates::{
    bad_primes, constants_at_place, extract_composition_divisor, find_certificate, BadPrimeSet,
    CertificateConstants, CertificateError, CompositionDivisor, JointCertificate, SearchOptions,
};
use crate::linalg::Fp;
use crate::padic::{min_valuation, Padic};
use crate::place::Place;
use crate::poly::{HomogMap, MultiPoly, PolyError, PolyMap, DEFAULT_TERM_CAP};
use crate::real::{Hp, Real};
use crate::regularity::AutomorphismPair;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreenError {
    #[error("point has {found} coordinates, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("archimedean iteration left the floating-point range at step {0}")]
    Overflow(u32),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("the given map is not the inverse of the pair member")]
    NotInverse,
    #[error(transparent)]
    Certificate(#[from] CertificateError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Member {
    First,
    Second,
}

impl Member {
    fn index(self) -> usize {
        match self {
            Member::First => 0,
            Member::Second => 1,
        }
    }

    fn region_name(self) -> &'static str {
        match self {
            Member::First => "V_f",
            Member::Second => "V_g",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Precision {
    /// IEEE double precision.
    #[default]
    Hardware,
    /// 256-bit binary floats.
    High,
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "f64" | "hardware" | "double" => Ok(Precision::Hardware),
            "hp" | "high" | "60" | "256" => Ok(Precision::High),
            other => Err(format!("unknown precision mode {other:?}")),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::Hardware => "f64",
            Precision::High => "hp",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenOptions {
    pub tol: f64,
    /// `None` means 1000 steps at the archimedean place and 100 at a prime.
    pub iter_cap: Option<u32>,
    pub precision: Precision,
    /// Initial relative precision of p-adic iteration, in digits.
    pub padic_digits: i64,
}

impl Default for GreenOptions {
    fn default() -> Self {
        GreenOptions {
            tol: 1e-10,
            iter_cap: None,
            precision: Precision::Hardware,
            padic_digits: 64,
        }
    }
}

impl GreenOptions {
    pub fn with_tol(tol: f64) -> Self {
        GreenOptions {
            tol,
            ..Default::default()
        }
    }

    pub fn iter_cap_at(&self, place: Place) -> u32 {
        self.iter_cap.unwrap_or(match place {
            Place::Archimedean => 1000,
            Place::Finite(_) => 100,
        })
    }
}

/// `coeff · ln(base)`, an exactly known value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogMultiple {
    pub coeff: BigRational,
    pub base: u64,
}

impl LogMultiple {
    pub fn zero() -> Self {
        LogMultiple {
            coeff: BigRational::zero(),
            base: 1,
        }
    }

    pub fn value(&self) -> f64 {
        if self.coeff.is_zero() {
            return 0.0;
        }
        to_f64(&self.coeff) * (self.base as f64).ln()
    }

    pub fn value_hp(&self) -> Hp {
        if self.coeff.is_zero() {
            return <Hp as Real>::zero();
        }
        Hp::from_rational(&self.coeff) * Hp::from_f64(self.base as f64).ln()
    }
}

impl fmt::Display for LogMultiple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff.is_zero() {
            f.write_str("0")
        } else if self.coeff.is_one() {
            write!(f, "log {}", self.base)
        } else {
            write!(f, "{}*log {}", self.coeff, self.base)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ErrorBound {
    Rigorous(f64),
    /// Last successive difference of an orbit that never met a tail bound.
    Heuristic(f64),
}

impl ErrorBound {
    pub fn value(&self) -> f64 {
        match self {
            ErrorBound::Rigorous(e) | ErrorBound::Heuristic(e) => *e,
        }
    }

    pub fn is_rigorous(&self) -> bool {
        matches!(self, ErrorBound::Rigorous(_))
    }
}

impl fmt::Display for ErrorBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorBound::Rigorous(e) => write!(f, "{e:e}"),
            ErrorBound::Heuristic(e) => write!(f, "heuristic:{e:e}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// The starting point lies in the map's own region.
    InOwn(Member),
    /// The orbit entered the map's own region at this step.
    Entered { member: Member, step: u32 },
    /// Pair value at a prime of good reduction.
    GoodReduction,
    /// The rational orbit is exactly periodic from this step on.
    Periodic { step: u32 },
    /// The orbit became integral at a prime where the map is integral.
    Integral { step: u32 },
    /// From this step the reduced direction at infinity never meets the
    /// indeterminacy of the top-degree forms modulo p.
    ReductionOrbit { step: u32 },
    NotEntered,
}

impl Region {
    pub fn is_rigorous(&self) -> bool {
        !matches!(self, Region::NotEntered)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::InOwn(m) => write!(f, "in-{}", m.region_name()),
            Region::Entered { member, step } => {
                write!(f, "entered-{}@{step}", member.region_name())
            }
            Region::GoodReduction => f.write_str("good-reduction"),
            Region::Periodic { step } => write!(f, "periodic@{step}"),
            Region::Integral { step } => write!(f, "integral@{step}"),
            Region::ReductionOrbit { step } => write!(f, "reduction-orbit@{step}"),
            Region::NotEntered => f.write_str("not-entered"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreenValue {
    pub value: f64,
    pub error: ErrorBound,
    pub iterations: u32,
    pub place: Place,
    pub region: Region,
    /// Set when the value is known in closed form.
    pub exact: Option<LogMultiple>,
    /// The value in 256-bit precision when it was computed that way.
    pub high: Option<Hp>,
}

impl GreenValue {
    fn exact(v: LogMultiple, place: Place, region: Region, iterations: u32) -> Self {
        GreenValue {
            value: v.value(),
            error: ErrorBound::Rigorous(0.0),
            iterations,
            place,
            region,
            exact: Some(v),
            high: None,
        }
    }

    pub fn is_rigorous(&self) -> bool {
        self.error.is_rigorous()
    }
}

/// Region parameters of a pair at one place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionParams {
    pub place: Place,
    pub epsilon: BigRational,
    pub delta: BigRational,
    pub d_f: u32,
    pub d_g: u32,
    pub d_j: u32,
    pub l: u32,
}

impl From<&CertificateConstants> for RegionParams {
    fn from(c: &CertificateConstants) -> Self {
        RegionParams {
            place: c.place,
            epsilon: c.epsilon.clone(),
            delta: c.delta.clone(),
            d_f: c.d_f,
            d_g: c.d_g,
            d_j: c.d_j,
            l: c.l,
        }
    }
}

/// Constants of the tail bound for one member at one place.
#[derive(Clone, Debug, PartialEq)]
pub struct TailConstants {
    pub d: u32,
    /// `log⁺ C2` with `‖f(X)‖ ≤ C2 max(‖X‖, 1)^d`.
    pub log_c2: f64,
    pub log_inv_epsilon: f64,
    pub log_inv_delta: f64,
    /// Degree and `log⁺ C2` of the inverse map.
    pub inverse: Option<(u32, f64)>,
    /// Bound on `|ℓ_{m+1} − d ℓ_m|` inside the region.
    pub m: f64,
}

impl TailConstants {
    fn new(d: u32, log_c2: f64, eps: &BigRational, delta: &BigRational, inverse: Option<(u32, f64)>) -> Self {
        let log_inv_epsilon = -ln_abs_rational(eps);
        let log_inv_delta = -ln_abs_rational(delta);
        let df = d as f64;
        let mut lower = df * log_inv_epsilon;
        if let Some((dh, lc2h)) = inverse {
            let dh = dh as f64;
            lower = lower.min((df - 1.0 / dh) * log_inv_epsilon + lc2h / dh);
        }
        // Rounding in the logarithms above is absorbed by the factor.
        let m = log_c2.max(log_inv_delta).max(lower) * (1.0 + 1e-12);
        TailConstants {
            d,
            log_c2,
            log_inv_epsilon,
            log_inv_delta,
            inverse,
            m,
        }
    }

    /// `M / (d^m (d − 1))`.
    pub fn tail(&self, m: u32) -> f64 {
        let d = self.d as f64;
        self.m / (d - 1.0) / d.powi(m.min(i32::MAX as u32) as i32)
    }

    /// `C` in `G(X) ≤ log⁺‖X‖ + C`.
    pub fn upper_constant(&self) -> f64 {
        self.log_c2 / (self.d as f64 - 1.0)
    }

    /// `C` in `G(X) ≥ log⁺‖X‖ + C` on the map's own region.
    pub fn lower_constant(&self) -> f64 {
        let d = self.d as f64;
        -(self.log_inv_delta.max(d * self.log_inv_epsilon)) / (d - 1.0)
    }
}

/// A pair with everything needed to evaluate Green functions.
#[derive(Clone, Debug)]
pub struct AnalyzedPair {
    maps: [PolyMap; 2],
    homog: [HomogMap; 2],
    pub certificate: JointCertificate,
    pub divisor: CompositionDivisor,
    pub bad: BadPrimeSet,
    inverses: [Option<PolyMap>; 2],
}

impl AnalyzedPair {
    pub fn new(f: &PolyMap, g: &PolyMap, search: &SearchOptions) -> Result<Self, GreenError> {
        if f.dim() != g.dim() {
            return Err(GreenError::Dimension {
                expected: f.dim(),
                found: g.dim(),
            });
        }
        let (hf, hg) = (f.homogenize(), g.homogenize());
        let certificate = find_certificate(&hf, &hg, search)?;
        let divisor = extract_composition_divisor(f, g, DEFAULT_TERM_CAP)?;
        let bad = bad_primes(f, g, &certificate, &divisor)?;
        let inverse_pair = f.compose(g).map(|c| c.is_identity()).unwrap_or(false);
        let inverses = if inverse_pair {
            [Some(g.clone()), Some(f.clone())]
        } else {
            [None, None]
        };
        Ok(AnalyzedPair {
            maps: [f.clone(), g.clone()],
            homog: [hf, hg],
            certificate,
            divisor,
            bad,
            inverses,
        })
    }

    /// The power pair `(f^{l2}, f^{-l1})` with inverses `f^{-l2}`, `f^{l1}`.
    pub fn from_automorphism(ap: &AutomorphismPair, search: &SearchOptions) -> Result<Self, GreenError> {
        let pair = Self::new(&ap.s.0, &ap.s.1, search)?;
        let inv_first = ap.f_inv.iterate(ap.l2)?;
        let inv_second = ap.f.iterate(ap.l1)?;
        pair.with_inverse(Member::First, inv_first)?
            .with_inverse(Member::Second, inv_second)
    }

    /// Records an inverse of one member after checking it symbolically.
    pub fn with_inverse(mut self, member: Member, inv: PolyMap) -> Result<Self, GreenError> {
        let m = &self.maps[member.index()];
        if inv.dim() != m.dim() || !m.compose(&inv)?.is_identity() {
            return Err(GreenError::NotInverse);
        }
        self.inverses[member.index()] = Some(inv);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn map(&self, member: Member) -> &PolyMap {
        &self.maps[member.index()]
    }

    pub fn inverse(&self, member: Member) -> Option<&PolyMap> {
        self.inverses[member.index()].as_ref()
    }

    pub fn degree(&self, member: Member) -> u32 {
        self.maps[member.index()].degree()
    }

    pub fn constants(&self, place: Place) -> CertificateConstants {
        constants_at_place(
            &self.certificate,
            &self.divisor,
            &self.homog[0],
            &self.homog[1],
            place,
        )
    }

    pub fn region_params(&self, place: Place) -> RegionParams {
        RegionParams::from(&self.constants(place))
    }

    /// Primes at which a point could have a nonzero pair potential.
    pub fn contributing_primes(&self, x: &[BigRational]) -> Result<Vec<u64>, GreenError> {
        let mut ps = self.bad.primes();
        let den = crate::arith::lcm_denominators(x.iter());
        ps.extend(crate::arith::prime_factors(&den)?);
        ps.sort_unstable();
        ps.dedup();
        Ok(ps)
    }

    pub fn tail_constants(&self, member: Member, place: Place) -> TailConstants {
        let params = self.region_params(place);
        let map = self.map(member);
        let inverse = self
            .inverse(member)
            .map(|h| (h.degree(), growth_constant(h, place).max(0.0)));
        TailConstants::new(
            map.degree(),
            growth_constant(map, place).max(0.0),
            &params.epsilon,
            &params.delta,
            inverse,
        )
    }

    fn check_point(&self, x: &[BigRational]) -> Result<(), GreenError> {
        if x.len() != self.dim() {
            return Err(GreenError::Dimension {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

/// `log C2`: at the archimedean place `C2` is the largest term count of a
/// component times the largest coefficient; at a prime it is the largest
/// coefficient norm.
pub fn growth_constant(f: &PolyMap, place: Place) -> f64 {
    let coeffs = f.components().iter().flat_map(|c| c.coefficients());
    match place {
        Place::Archimedean => {
            let terms = f.components().iter().map(|c| c.len()).max().unwrap_or(1).max(1);
            let maxc = coeffs
                .map(|c| c.abs())
                .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
            if maxc.is_zero() {
                return f64::NEG_INFINITY;
            }
            (terms as f64).ln() + ln_abs_rational(&maxc)
        }
        Place::Finite(p) => {
            let maxc = coeffs
                .map(|c| padic_abs(c, p))
                .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
            if maxc.is_zero() {
                return f64::NEG_INFINITY;
            }
            ln_abs_rational(&maxc)
        }
    }
}

/// Sup norm of a rational point at a place, as an exact rational.
pub fn norm_rational(x: &[BigRational], place: Place) -> BigRational {
    x.iter()
        .map(|c| match place {
            Place::Archimedean => c.abs(),
            Place::Finite(p) => padic_abs(c, p),
        })
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a })
}

/// `max(0, −min_i v_p(x_i))`, the exponent of `p` in `max(‖x‖_p, 1)`.
pub fn log_plus_exponent(x: &[BigRational], p: u64) -> i64 {
    x.iter()
        .filter_map(|c| valuation(c, p))
        .map(|v| -v)
        .max()
        .unwrap_or(0)
        .max(0)
}

/// `log⁺‖X‖_p` in closed form.
pub fn log_plus_norm_exact(x: &[BigRational], p: u64) -> LogMultiple {
    match log_plus_exponent(x, p) {
        0 => LogMultiple::zero(),
        e => LogMultiple {
            coeff: BigRational::from_integer(e.into()),
            base: p,
        },
    }
}

/// `log⁺‖X‖_v` of a rational point.
pub fn log_plus_norm(x: &[BigRational], place: Place) -> f64 {
    match place {
        Place::Finite(p) => log_plus_norm_exact(x, p).value(),
        Place::Archimedean => {
            let n = norm_rational(x, place);
            if n <= BigRational::one() {
                0.0
            } else {
                ln_abs_rational(&n)
            }
        }
    }
}

/// `log⁺‖z‖` of a complex point.
pub fn log_plus_norm_complex(z: &[Complex64]) -> f64 {
    let n = z.iter().map(|c| c.norm()).fold(0.0, f64::max);
    n.ln().max(0.0)
}

fn in_region_rational(
    map: &PolyMap,
    x: &[BigRational],
    fx: &[BigRational],
    params: &RegionParams,
) -> bool {
    let one = BigRational::one();
    let nx = norm_rational(x, params.place);
    if nx.clone() * &params.epsilon < one {
        return true;
    }
    let nf = norm_rational(fx, params.place);
    let lhs = if nf > one { nf } else { one.clone() };
    let pow = nx.pow(map.degree() as i32);
    let rhs = &params.delta * if pow > one { pow } else { one };
    lhs > rhs
}

/// Exact membership of a rational point in `V_f` and `V_g`.
pub fn region_membership(
    pair: &AnalyzedPair,
    x: &[BigRational],
    params: &RegionParams,
) -> Result<(bool, bool), GreenError> {
    pair.check_point(x)?;
    let mut out = [false; 2];
    for m in [Member::First, Member::Second] {
        let map = pair.map(m);
        let fx = map.eval(x)?;
        out[m.index()] = in_region_rational(map, x, &fx, params);
    }
    Ok((out[0], out[1]))
}

/// Scalars the archimedean iteration runs over.
pub trait Coord: Clone + Add<Output = Self> + Mul<Output = Self> {
    type R: Real;
    fn lift(q: &BigRational) -> Self;
    fn scale(&self, r: &Self::R) -> Self;
    fn modulus(&self) -> Self::R;
    fn zero() -> Self;
    fn one() -> Self;
}

impl Coord for f64 {
    type R = f64;
    fn lift(q: &BigRational) -> Self {
        to_f64(q)
    }
    fn scale(&self, r: &f64) -> Self {
        self * r
    }
    fn modulus(&self) -> f64 {
        f64::abs(*self)
    }
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
}

impl Coord for Hp {
    type R = Hp;
    fn lift(q: &BigRational) -> Self {
        Hp::from_rational(q)
    }
    fn scale(&self, r: &Hp) -> Self {
        self.clone() * r.clone()
    }
    fn modulus(&self) -> Hp {
        Real::abs(self)
    }
    fn zero() -> Self {
        <Hp as Real>::zero()
    }
    fn one() -> Self {
        <Hp as Real>::one()
    }
}

impl Coord for Complex64 {
    type R = f64;
    fn lift(q: &BigRational) -> Self {
        Complex64::new(to_f64(q), 0.0)
    }
    fn scale(&self, r: &f64) -> Self {
        self * r
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
}

fn ln_rational<R: Real + 'static>(q: &BigRational) -> R {
    if std::any::TypeId::of::<R>() == std::any::TypeId::of::<f64>() {
        R::from_f64(ln_abs_rational(q))
    } else {
        R::from_rational(&q.abs()).ln()
    }
}

/// Orbit in scaled form `Y = e^ℓ · u` with `ℓ = log⁺‖Y‖`, so that `ℓ` can
/// grow like `d^m` without overflow.
struct ScaledOrbit<'a, C: Coord> {
    map: &'a PolyMap,
    d: u32,
    u: Vec<C>,
    ell: C::R,
    step: u32,
}

impl<'a, C: Coord + 'static> ScaledOrbit<'a, C>
where
    C::R: 'static,
{
    fn from_rational(map: &'a PolyMap, y: &[BigRational], step: u32) -> Self {
        let n = norm_rational(y, Place::Archimedean);
        let (u, ell) = if n <= BigRational::one() {
            (y.iter().map(C::lift).collect(), <C::R as Real>::zero())
        } else {
            (
                y.iter().map(|c| C::lift(&(c / &n))).collect(),
                ln_rational::<C::R>(&n),
            )
        };
        ScaledOrbit {
            map,
            d: map.degree(),
            u,
            ell,
            step,
        }
    }

    fn from_point(map: &'a PolyMap, z: Vec<C>) -> Self {
        let n = z
            .iter()
            .map(|c| c.modulus())
            .fold(<C::R as Real>::zero(), |a, b| a.max(b));
        let one = <C::R as Real>::one();
        let (u, ell) = if n <= one {
            (z, <C::R as Real>::zero())
        } else {
            let inv = one / n.clone();
            (z.iter().map(|c| c.scale(&inv)).collect(), n.ln())
        };
        ScaledOrbit {
            map,
            d: map.degree(),
            u,
            ell,
            step: 0,
        }
    }

    fn advance(&mut self) -> Result<(), GreenError> {
        let d = self.d;
        let factors: Vec<C::R> = (0..=d)
            .map(|k| (-(<C::R as Real>::from_f64((d - k) as f64) * self.ell.clone())).exp())
            .collect();
        let v: Vec<C> = self
            .map
            .components()
            .iter()
            .map(|c| {
                let parts = c.eval_graded(&self.u, C::zero(), C::one(), C::lift);
                parts
                    .iter()
                    .enumerate()
                    .fold(C::zero(), |acc, (k, s)| acc + s.scale(&factors[k]))
            })
            .collect();
        let nv = v
            .iter()
            .map(|c| c.modulus())
            .fold(<C::R as Real>::zero(), |a, b| a.max(b));
        let zero = <C::R as Real>::zero();
        let dl = <C::R as Real>::from_f64(d as f64) * self.ell.clone();
        if nv == zero {
            self.u = v;
            self.ell = zero;
        } else {
            let cand = dl.clone() + nv.ln();
            let ell = if cand > zero { cand } else { zero };
            let s = (dl - ell.clone()).exp();
            self.u = v.iter().map(|c| c.scale(&s)).collect();
            self.ell = ell;
        }
        self.step += 1;
        if !self.ell.is_finite() {
            return Err(GreenError::Overflow(self.step));
        }
        Ok(())
    }
}

const EXACT_BITS: u64 = 1024;
const EXACT_STEPS: usize = 64;

fn bits(y: &[BigRational]) -> u64 {
    y.iter()
        .map(|c| c.numer().bits() + c.denom().bits())
        .max()
        .unwrap_or(0)
}

/// Exact prefix of a rational orbit, stopped when coordinates get large.
/// Returns the orbit and, if a point repeats, the step where the cycle
/// closes.
fn exact_prefix(map: &PolyMap, x: &[BigRational]) -> Result<(Vec<Vec<BigRational>>, Option<u32>), GreenError> {
    let mut orbit = vec![x.to_vec()];
    let mut seen: HashSet<Vec<BigRational>> = HashSet::new();
    seen.insert(x.to_vec());
    while orbit.len() <= EXACT_STEPS && bits(orbit.last().unwrap()) <= EXACT_BITS {
        let next = map.eval(orbit.last().unwrap())?;
        if !seen.insert(next.clone()) {
            let step = orbit.len() as u32;
            orbit.push(next);
            return Ok((orbit, Some(step)));
        }
        orbit.push(next);
    }
    Ok((orbit, None))
}

struct ArchSetup {
    entered: Option<u32>,
    log_inv_eps: f64,
    log_delta: f64,
}

fn float_phase<C: Coord + 'static>(
    mut orbit: ScaledOrbit<'_, C>,
    setup: ArchSetup,
    tc: &TailConstants,
    member: Member,
    opts: &GreenOptions,
) -> Result<(C::R, GreenValue), GreenError>
where
    C::R: 'static,
{
    let cap = opts.iter_cap_at(Place::Archimedean);
    let d = <C::R as Real>::from_f64(tc.d as f64);
    let inv_d = <C::R as Real>::one() / d.clone();
    let mut scale = <C::R as Real>::one();
    for _ in 0..orbit.step {
        scale = scale * inv_d.clone();
    }
    let mut entered = setup.entered;
    let ur = <C::R as Real>::UNIT_ROUNDOFF;
    let mut prev: Option<f64> = None;
    loop {
        let k = orbit.step;
        let value_r = orbit.ell.clone() * scale.clone();
        let value = value_r.to_f64();
        let allowance = 1e3 * ur * (1.0 + value.abs());
        if let Some(e) = entered {
            let tail = tc.tail(k);
            let done = tail + allowance <= opts.tol || (allowance > opts.tol / 2.0 && tail <= opts.tol / 2.0);
            if k >= e && done {
                let region = if e == 0 {
                    Region::InOwn(member)
                } else {
                    Region::Entered { member, step: e }
                };
                return Ok((
                    value_r,
                    GreenValue {
                        value,
                        error: ErrorBound::Rigorous(tail + allowance),
                        iterations: k,
                        place: Place::Archimedean,
                        region,
                        exact: None,
                        high: None,
                    },
                ));
            }
        }
        if k >= cap {
            let diff = prev.map(|p| (p - value).abs()).unwrap_or(f64::INFINITY);
            return Ok((
                value_r,
                GreenValue {
                    value,
                    error: ErrorBound::Heuristic(diff),
                    iterations: k,
                    place: Place::Archimedean,
                    region: Region::NotEntered,
                    exact: None,
                    high: None,
                },
            ));
        }
        prev = Some(value);
        let ell_k = orbit.ell.to_f64();
        orbit.advance()?;
        scale = scale * inv_d.clone();
        if entered.is_none() {
            let margin = 1e7 * ur * ell_k.max(1.0);
            let ell_next = orbit.ell.to_f64();
            let in_ball = ell_k < setup.log_inv_eps - margin;
            let grows = ell_next > setup.log_delta + tc.d as f64 * ell_k + margin;
            if in_ball || grows {
                entered = Some(k);
            }
        }
    }
}

fn arch_rational<C: Coord + 'static>(
    pair: &AnalyzedPair,
    member: Member,
    x: &[BigRational],
    opts: &GreenOptions,
) -> Result<(Option<C::R>, GreenValue), GreenError>
where
    C::R: 'static,
{
    let map = pair.map(member);
    let params = pair.region_params(Place::Archimedean);
    let tc = pair.tail_constants(member, Place::Archimedean);
    let (orbit, cycle) = exact_prefix(map, x)?;
    if let Some(step) = cycle {
        return Ok((
            None,
            GreenValue::exact(LogMultiple::zero(), Place::Archimedean, Region::Periodic { step }, step),
        ));
    }
    let entered = orbit
        .windows(2)
        .position(|w| in_region_rational(map, &w[0], &w[1], &params))
        .map(|k| k as u32);
    let last = orbit.len() - 1;
    let scaled = ScaledOrbit::<C>::from_rational(map, &orbit[last], last as u32);
    let setup = ArchSetup {
        entered,
        log_inv_eps: tc.log_inv_epsilon,
        log_delta: -tc.log_inv_delta,
    };
    let (r, v) = float_phase(scaled, setup, &tc, member, opts)?;
    Ok((Some(r), v))
}

/// The Green function of one member of the pair at a rational point.
pub fn green_eval(
    pair: &AnalyzedPair,
    member: Member,
    x: &[BigRational],
    place: Place,
    opts: &GreenOptions,
) -> Result<GreenValue, GreenError> {
    pair.check_point(x)?;
    if !(opts.tol > 0.0) {
        return Err(GreenError::BadTolerance(opts.tol));
    }
    match place {
        Place::Archimedean => match opts.precision {
            Precision::Hardware => Ok(arch_rational::<f64>(pair, member, x, opts)?.1),
            Precision::High => {
                let (r, mut v) = arch_rational::<Hp>(pair, member, x, opts)?;
                v.high = Some(match (&v.exact, r) {
                    (Some(e), _) => e.value_hp(),
                    (None, Some(r)) => r,
                    (None, None) => <Hp as Real>::zero(),
                });
                Ok(v)
            }
        },
        Place::Finite(p) => finite_green(pair, member, x, p, opts),
    }
}

/// The archimedean Green function of one member at a complex point.
pub fn green_eval_complex(
    pair: &AnalyzedPair,
    member: Member,
    z: &[Complex64],
    opts: &GreenOptions,
) -> Result<GreenValue, GreenError> {
    if z.len() != pair.dim() {
        return Err(GreenError::Dimension {
            expected: pair.dim(),
            found: z.len(),
        });
    }
    let map = pair.map(member);
    let tc = pair.tail_constants(member, Place::Archimedean);
    let setup = ArchSetup {
        entered: None,
        log_inv_eps: tc.log_inv_epsilon,
        log_delta: -tc.log_inv_delta,
    };
    let orbit = ScaledOrbit::<Complex64>::from_point(map, z.to_vec());
    Ok(float_phase(orbit, setup, &tc, member, opts)?.1)
}

/// The partial values `ℓ_k / d^k` for `k = 0..=m` at the archimedean place.
pub fn partial_values(
    pair: &AnalyzedPair,
    member: Member,
    x: &[BigRational],
    m: u32,
    precision: Precision,
) -> Result<Vec<f64>, GreenError> {
    pair.check_point(x)?;
    match precision {
        Precision::Hardware => partial_values_in::<f64>(pair.map(member), x, m),
        Precision::High => partial_values_in::<Hp>(pair.map(member), x, m),
    }
}

fn partial_values_in<C: Coord + 'static>(map: &PolyMap, x: &[BigRational], m: u32) -> Result<Vec<f64>, GreenError>
where
    C::R: 'static,
{
    let d = <C::R as Real>::from_f64(map.degree() as f64);
    let inv_d = <C::R as Real>::one() / d;
    let mut orbit = ScaledOrbit::<C>::from_rational(map, x, 0);
    let mut scale = <C::R as Real>::one();
    let mut out = Vec::with_capacity(m as usize + 1);
    for k in 0..=m {
        out.push((orbit.ell.clone() * scale.clone()).to_f64());
        if k < m {
            orbit.advance()?;
            scale = scale * inv_d.clone();
        }
    }
    Ok(out)
}

/// Partial values at a prime, exact up to p-adic precision.
pub fn partial_values_padic(
    pair: &AnalyzedPair,
    member: Member,
    x: &[BigRational],
    p: u64,
    m: u32,
) -> Result<Vec<LogMultiple>, GreenError> {
    pair.check_point(x)?;
    let map = pair.map(member);
    let d = BigInt::from(map.degree());
    let mut y = to_padic(x, p, 256);
    let mut out = Vec::new();
    for k in 0..=m {
        let e = min_valuation(&y).map(|v| (-v).max(0)).unwrap_or(0);
        out.push(LogMultiple {
            coeff: BigRational::new(BigInt::from(e), num_traits::pow(d.clone(), k as usize)),
            base: p,
        });
        if k < m {
            y = eval_padic(map, &y, p, 256);
        }
    }
    Ok(out)
}

fn to_padic(x: &[BigRational], p: u64, rel: i64) -> Vec<Padic> {
    x.iter().map(|c| Padic::from_rational(c, p, rel)).collect()
}

fn eval_padic(map: &PolyMap, y: &[Padic], p: u64, rel: i64) -> Vec<Padic> {
    let one = Padic::from_rational(&BigRational::one(), p, rel);
    map.components()
        .iter()
        .map(|c| c.eval_with(y, Padic::exact_zero(p), one.clone(), |q| Padic::from_rational(q, p, rel)))
        .collect()
}

fn is_integral_at(map: &PolyMap, p: u64) -> bool {
    map.components()
        .iter()
        .flat_map(|c| c.coefficients())
        .all(|c| valuation(c, p).map(|v| v >= 0).unwrap_or(true))
}

/// Projective normalization in `F_p^n`: first nonzero entry scaled to one.
fn normalize_fp(w: &mut [u64], p: u64) -> bool {
    let Some(lead) = w.iter().copied().find(|&c| c != 0) else {
        return false;
    };
    let inv = crate::arith::inv_mod(lead, p).expect("prime modulus");
    for c in w.iter_mut() {
        *c = crate::arith::mulmod(*c, inv, p);
    }
    true
}

/// Whether the orbit of `w` under the top-degree forms modulo `p` avoids
/// the zero vector. `None` when the step cap is hit first.
fn reduction_orbit_avoids_zero(top: &[MultiPoly], w: Vec<u64>, p: u64, cap: usize) -> Option<bool> {
    let mut w = w;
    let mut seen = HashSet::new();
    loop {
        if !normalize_fp(&mut w, p) {
            return Some(false);
        }
        if !seen.insert(w.clone()) {
            return Some(true);
        }
        if seen.len() > cap {
            return None;
        }
        let pt: Vec<Fp> = w.iter().map(|&c| Fp::new(c, p)).collect();
        w = top
            .iter()
            .map(|c| {
                c.eval_with(&pt, Fp::new(0, p), Fp::new(1, p), |q| {
                    Fp::new(reduce_mod_p(q, p).expect("integral"), p)
                })
                .value
            })
            .collect();
    }
}

enum FiniteOutcome {
    Done(GreenValue),
    PrecisionLoss { last: Option<(i64, u32)> },
}

fn finite_green(
    pair: &AnalyzedPair,
    member: Member,
    x: &[BigRational],
    p: u64,
    opts: &GreenOptions,
) -> Result<GreenValue, GreenError> {
    let map = pair.map(member);
    let place = Place::Finite(p);
    let (_, cycle) = exact_prefix(map, x)?;
    if let Some(step) = cycle {
        return Ok(GreenValue::exact(LogMultiple::zero(), place, Region::Periodic { step }, step));
    }
    let mut rel = opts.padic_digits.max(8);
    let mut last = None;
    for _ in 0..4 {
        let outcome = if is_integral_at(map, p) {
            match integral_exact(map, x, p, rel, opts) {
                Some(o) => o,
                None => padic_iteration(pair, member, x, p, rel, opts)?,
            }
        } else {
            padic_iteration(pair, member, x, p, rel, opts)?
        };
        match outcome {
            FiniteOutcome::Done(v) => return Ok(v),
            FiniteOutcome::PrecisionLoss { last: l } => {
                last = l.or(last);
                rel *= 2;
            }
        }
    }
    let (e, k) = last.unwrap_or((log_plus_exponent(x, p), 0));
    let lm = LogMultiple {
        coeff: BigRational::new(e.into(), num_traits::pow(BigInt::from(map.degree()), k as usize)),
        base: p,
    };
    Ok(GreenValue {
        value: lm.value(),
        error: ErrorBound::Heuristic(f64::INFINITY),
        iterations: k,
        place,
        region: Region::NotEntered,
        exact: None,
        high: None,
    })
}

/// Exact value for a map with `p`-integral coefficients; `None` if no
/// exact certificate was found within the iteration cap.
fn integral_exact(map: &PolyMap, x: &[BigRational], p: u64, rel: i64, opts: &GreenOptions) -> Option<FiniteOutcome> {
    let place = Place::Finite(p);
    let d = map.degree();
    let top: Vec<MultiPoly> = map.components().iter().map(|c| c.homogeneous_component(d)).collect();
    let mut y = to_padic(x, p, rel);
    let mut last = None;
    for k in 0..opts.iter_cap_at(place) {
        let Some(vmin) = min_valuation(&y) else {
            return Some(FiniteOutcome::PrecisionLoss { last });
        };
        if vmin >= 0 {
            return Some(FiniteOutcome::Done(GreenValue::exact(
                LogMultiple::zero(),
                place,
                Region::Integral { step: k },
                k,
            )));
        }
        last = Some((-vmin, k));
        let w: Vec<u64> = y
            .iter()
            .map(|c| if !c.is_indistinct() && c.valuation() == vmin { c.leading_digit() } else { 0 })
            .collect();
        if reduction_orbit_avoids_zero(&top, w, p, 100_000) == Some(true) {
            let lm = LogMultiple {
                coeff: BigRational::new(BigInt::from(-vmin), num_traits::pow(BigInt::from(d), k as usize)),
                base: p,
            };
            return Some(FiniteOutcome::Done(GreenValue::exact(lm, place, Region::ReductionOrbit { step: k }, k)));
        }
        y = eval_padic(map, &y, p, rel);
    }
    None
}

fn padic_in_region(e: i64, e_next: i64, d: u32, p: u64, params: &RegionParams) -> bool {
    // ‖Y‖ = p^e with e ≥ 0 standing for max(‖Y‖, 1).
    let ln_p = (p as f64).ln();
    if (e as f64) * ln_p * (d as f64) < 4096.0 {
        let pr = BigRational::from_integer(BigInt::from(p));
        let norm = pr.pow(e as i32);
        if norm * &params.epsilon < BigRational::one() {
            return true;
        }
        let lhs = pr.pow(e_next as i32);
        let rhs = &params.delta * pr.pow((e * d as i64) as i32);
        lhs > rhs
    } else {
        let ln_delta = ln_abs_rational(&params.delta);
        (e_next as f64) * ln_p > ln_delta + (d as f64) * (e as f64) * ln_p + 1e-6
    }
}

fn padic_iteration(
    pair: &AnalyzedPair,
    member: Member,
    x: &[BigRational],
    p: u64,
    rel: i64,
    opts: &GreenOptions,
) -> Result<FiniteOutcome, GreenError> {
    let place = Place::Finite(p);
    let map = pair.map(member);
    let d = map.degree();
    let params = pair.region_params(place);
    let tc = pair.tail_constants(member, place);
    let cap = opts.iter_cap_at(place);
    let mut y = to_padic(x, p, rel);
    let Some(v0) = min_valuation(&y) else {
        return Ok(FiniteOutcome::PrecisionLoss { last: None });
    };
    let mut e = (-v0).max(0);
    let mut entered: Option<u32> = None;
    let mut prev: Option<f64> = None;
    let dd = BigInt::from(d);
    for k in 0.. {
        let lm = LogMultiple {
            coeff: BigRational::new(BigInt::from(e), num_traits::pow(dd.clone(), k as usize)),
            base: p,
        };
        let value = lm.value();
        if let Some(en) = entered {
            let tail = tc.tail(k);
            if k >= en && tail <= opts.tol {
                let region = if en == 0 { Region::InOwn(member) } else { Region::Entered { member, step: en } };
                return Ok(FiniteOutcome::Done(GreenValue {
                    value,
                    error: ErrorBound::Rigorous(tail),
                    iterations: k,
                    place,
                    region,
                    exact: None,
                    high: None,
                }));
            }
        }
        if k >= cap || e > 1 << 55 {
            let diff = prev.map(|q| (q - value).abs()).unwrap_or(f64::INFINITY);
            return Ok(FiniteOutcome::Done(GreenValue {
                value,
                error: ErrorBound::Heuristic(diff),
                iterations: k,
                place,
                region: Region::NotEntered,
                exact: None,
                high: None,
            }));
        }
        prev = Some(value);
        y = eval_padic(map, &y, p, rel);
        let Some(v) = min_valuation(&y) else {
            return Ok(FiniteOutcome::PrecisionLoss { last: Some((e, k)) });
        };
        let e_next = (-v).max(0);
        if entered.is_none() && padic_in_region(e, e_next, d, p, &params) {
            entered = Some(k);
        }
        e = e_next;
    }
    unreachable!()
}

/// `max(G_f, G_g)`; at a prime of good reduction this is `log⁺‖X‖_p`.
pub fn green_pair(
    pair: &AnalyzedPair,
    x: &[BigRational],
    place: Place,
    opts: &GreenOptions,
) -> Result<GreenValue, GreenError> {
    pair.check_point(x)?;
    if let Place::Finite(p) = place {
        if !pair.bad.contains(p) {
            return Ok(GreenValue::exact(log_plus_norm_exact(x, p), place, Region::GoodReduction, 0));
        }
    }
    let a = green_eval(pair, Member::First, x, place, opts)?;
    let b = green_eval(pair, Member::Second, x, place, opts)?;
    Ok(combine_max(a, b))
}

fn combine_max(a: GreenValue, b: GreenValue) -> GreenValue {
    let err = match (a.error, b.error) {
        (ErrorBound::Rigorous(x), ErrorBound::Rigorous(y)) => ErrorBound::Rigorous(x.max(y)),
        (x, y) => ErrorBound::Heuristic(x.value().max(y.value())),
    };
    let high = match (&a.high, &b.high) {
        (Some(x), Some(y)) => Some(x.clone().max(y.clone())),
        _ => None,
    };
    let exact = match (&a.exact, &b.exact) {
        (Some(x), Some(y)) => Some(if x.value() >= y.value() { x.clone() } else { y.clone() }),
        _ => None,
    };
    let iterations = a.iterations.max(b.iterations);
    let (top, _) = if a.value >= b.value { (a, b) } else { (b, a) };
    GreenValue {
        value: top.value,
        error: err,
        iterations,
        place: top.place,
        region: top.region,
        exact,
        high,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational;
    use crate::poly::{default_vars, parse_poly};

    const G_F_3_5: &str = "1.54291316255718749144939509545496163027521771383321799924801";
    const G_FINV_3_5: &str = "0.638213326253291019892097818467559516686260175148513512373707";

    fn map(components: &[&str]) -> PolyMap {
        let vars = default_vars(components.len());
        PolyMap::new(components.iter().map(|c| parse_poly(c, &vars).unwrap()).collect()).unwrap()
    }

    fn henon_pair() -> AnalyzedPair {
        let f = map(&["x2", "x2^2 - x1"]);
        let g = map(&["x1^2 - x2", "x1"]);
        AnalyzedPair::new(&f, &g, &SearchOptions::default()).unwrap()
    }

    fn pt(c: &[(i64, i64)]) -> Vec<BigRational> {
        c.iter().map(|&(n, d)| rational(n, d)).collect()
    }

    #[test]
    fn log_plus_norm_examples() {
        let p = Place::Finite(5);
        assert_eq!(log_plus_norm_exact(&pt(&[(1, 5), (2, 1)]), 5).to_string(), "log 5");
        assert_eq!(log_plus_norm(&pt(&[(1, 5), (2, 1)]), p), 5f64.ln());
        assert_eq!(log_plus_norm(&pt(&[(3, 1), (5, 1)]), Place::Archimedean), 5f64.ln());
        assert_eq!(log_plus_norm(&pt(&[(1, 2), (1, 3)]), Place::Finite(7)), 0.0);
        assert_eq!(log_plus_norm(&[], Place::Archimedean), 0.0);
    }

    #[test]
    fn region_examples() {
        let pair = henon_pair();
        let params = pair.region_params(Place::Archimedean);
        assert_eq!(params.delta, rational(1, 4));
        let (a, b) = region_membership(&pair, &pt(&[(1, 1), (15, 1)]), &params).unwrap();
        assert!(a && b);
        let (a, _) = region_membership(&pair, &pt(&[(30, 1), (50, 1)]), &params).unwrap();
        assert!(a);
        // Large first coordinate: f barely grows, f^{-1} squares it.
        let (a, b) = region_membership(&pair, &pt(&[(1000, 1), (0, 1)]), &params).unwrap();
        assert!(!a && b);
    }

    #[test]
    fn tail_constants_for_henon() {
        let pair = henon_pair();
        let tc = pair.tail_constants(Member::First, Place::Archimedean);
        assert_eq!(tc.d, 2);
        assert!((tc.log_c2 - 2f64.ln()).abs() < 1e-15);
        // min(2 ln 16, 1.5 ln 16 + ln 2 / 2) = 1.5 ln 16 + ln 2 / 2.
        let expected = 1.5 * 16f64.ln() + 2f64.ln() / 2.0;
        assert!((tc.m - expected).abs() < 1e-9);
        assert!(tc.tail(40) < 1e-10);
    }

    #[test]
    fn fixed_point_is_exactly_zero() {
        let pair = henon_pair();
        for x in [pt(&[(0, 1), (0, 1)]), pt(&[(2, 1), (2, 1)])] {
            for place in [Place::Archimedean, Place::Finite(2), Place::Finite(5)] {
                let v = green_eval(&pair, Member::First, &x, place, &GreenOptions::default()).unwrap();
                assert_eq!(v.value, 0.0);
                assert_eq!(v.error, ErrorBound::Rigorous(0.0));
                assert!(matches!(v.region, Region::Periodic { .. }));
            }
        }
    }

    #[test]
    fn archimedean_value_matches_golden() {
        let pair = henon_pair();
        let x = pt(&[(3, 1), (5, 1)]);
        let opts = GreenOptions::default();
        let v = green_eval(&pair, Member::First, &x, Place::Archimedean, &opts).unwrap();
        let golden: f64 = G_F_3_5.parse().unwrap();
        assert!((v.value - golden).abs() <= v.error.value(), "{v:?}");
        assert!(v.is_rigorous());
        assert!(v.error.value() <= 1e-10);
        let w = green_eval(&pair, Member::Second, &x, Place::Archimedean, &opts).unwrap();
        let golden_inv: f64 = G_FINV_3_5.parse().unwrap();
        assert!((w.value - golden_inv).abs() <= w.error.value(), "{w:?}");
        let pv = green_pair(&pair, &x, Place::Archimedean, &opts).unwrap();
        assert_eq!(pv.value, v.value);
    }

    #[test]
    fn high_precision_matches_golden() {
        let pair = henon_pair();
        let x = pt(&[(3, 1), (5, 1)]);
        let opts = GreenOptions {
            tol: 1e-40,
            precision: Precision::High,
            ..Default::default()
        };
        let v = green_eval(&pair, Member::First, &x, Place::Archimedean, &opts).unwrap();
        let h = v.high.clone().unwrap();
        let diff = (h - Hp::parse(G_F_3_5)).abs();
        assert!(diff < Hp::parse("1e-40"), "{diff:?}");
    }

    #[test]
    fn finite_values_are_exact() {
        let pair = henon_pair();
        let x = pt(&[(1, 5), (2, 1)]);
        let p = Place::Finite(5);
        let opts = GreenOptions::default();
        let f = green_eval(&pair, Member::First, &x, p, &opts).unwrap();
        assert_eq!(f.exact.as_ref().unwrap().coeff, rational(1, 2));
        let g = green_eval(&pair, Member::Second, &x, p, &opts).unwrap();
        assert_eq!(g.exact.as_ref().unwrap().coeff, rational(1, 1));
        let s = green_pair(&pair, &x, p, &opts).unwrap();
        assert_eq!(s.region, Region::GoodReduction);
        assert_eq!(s.value.to_string(), "1.6094379124341003");
        assert_eq!(s.error, ErrorBound::Rigorous(0.0));
    }

    #[test]
    fn bad_prime_iteration_has_tail_bound() {
        let f = map(&["x2", "x2^2 - 6*x1"]);
        let g = map(&["1/6*x1^2 - 1/6*x2", "x1"]);
        let pair = AnalyzedPair::new(&f, &g, &SearchOptions::default()).unwrap();
        assert!(pair.bad.contains(2) && pair.bad.contains(3));
        let x = pt(&[(1, 1), (1, 3)]);
        let opts = GreenOptions::default();
        let v = green_eval(&pair, Member::Second, &x, Place::Finite(3), &opts).unwrap();
        assert!(v.is_rigorous(), "{v:?}");
        let partial = partial_values_padic(&pair, Member::Second, &x, 3, v.iterations + 10).unwrap();
        let far = partial.last().unwrap().value();
        assert!((far - v.value).abs() <= v.error.value() + 1e-15);
    }

    #[test]
    fn complex_points_iterate() {
        let pair = henon_pair();
        let z = [Complex64::new(3.0, 0.0), Complex64::new(5.0, 0.0)];
        let v = green_eval_complex(&pair, Member::First, &z, &GreenOptions::default()).unwrap();
        let golden: f64 = G_F_3_5.parse().unwrap();
        assert!((v.value - golden).abs() <= v.error.value());
    }
}
