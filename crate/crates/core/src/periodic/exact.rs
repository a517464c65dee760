//! Periodic points by elimination.
//!
//! On the line family `y = t − λ·x` the system `f^n(x, y) = (x, y)` becomes
//! two polynomials in `x` whose resultant `R(t)` vanishes exactly at the
//! `t`-values of periodic points. For a generic slope `λ` distinct points
//! have distinct `t`, so root multiplicities of `R` are intersection
//! multiplicities.

use super::numeric::polish;
use super::upoly::{
    interpolate, rational_candidates, resultant, roots, square_free, CPoly, UPoly,
};
use super::{dist, sort_points, HenonMap, PeriodicError, PeriodicPoint, PeriodicSet, Point};
use crate::arith::{int, rational};
use crate::poly::{MultiPoly, DEFAULT_TERM_CAP};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactOptions {
    pub n_cap: u32,
    pub residual_tol: f64,
    /// Largest denominator tried when recognizing rational roots.
    pub max_denominator: i64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            n_cap: 3,
            residual_tol: 1e-10,
            max_denominator: 1_000_000,
        }
    }
}

/// Slopes `k / (2k + 5)`, tried in order until one separates the points.
fn slopes() -> impl Iterator<Item = BigRational> {
    (1..=8).map(|k| rational(k, 2 * k + 5))
}

struct Line {
    lambda: BigRational,
    a: MultiPoly,
    b: MultiPoly,
}

impl Line {
    fn restrict(&self, p: &MultiPoly, t: &BigRational) -> Result<UPoly, PeriodicError> {
        let x = MultiPoly::var(1, 0);
        let y = MultiPoly::constant(1, t.clone()).sub(&x.scale(&self.lambda))?;
        Ok(UPoly::from_multipoly(&p.compose(&[x, y], DEFAULT_TERM_CAP)?))
    }

    fn restrict_complex(&self, p: &MultiPoly, t: Complex64) -> CPoly {
        let lam = Complex64::new(crate::arith::to_f64(&self.lambda), 0.0);
        let x = CPoly(vec![Complex64::zero(), Complex64::new(1.0, 0.0)]);
        let y = CPoly(vec![t, -lam]);
        let mut out = CPoly(Vec::new());
        for (e, c) in p.terms() {
            let mut term = CPoly::constant(Complex64::new(crate::arith::to_f64(c), 0.0));
            for _ in 0..e[0] {
                term = term * x.clone();
            }
            for _ in 0..e[1] {
                term = term * y.clone();
            }
            out = out + term;
        }
        out
    }
}

fn top_coefficient(p: &MultiPoly, lambda: &BigRational) -> Result<BigRational, PeriodicError> {
    let d = p.total_degree().unwrap_or(0);
    Ok(p.homogeneous_component(d).eval(&[int(1), -lambda.clone()])?)
}

fn is_periodic_exact(f: &HenonMap, z: &[BigRational; 2], n: u32) -> bool {
    let mut w = z.clone();
    for _ in 0..n {
        w = f.eval_rational(&w);
    }
    &w == z
}

fn to_point(z: &[BigRational; 2]) -> Point {
    let c = |q: &BigRational| Complex64::new(crate::arith::to_f64(q), 0.0);
    [c(&z[0]), c(&z[1])]
}

/// `None` when the slope fails to separate the periodic points.
fn solve_on_line(
    f: &HenonMap,
    n: u32,
    line: &Line,
    expected: u64,
    opts: &ExactOptions,
) -> Result<Option<Vec<PeriodicPoint>>, PeriodicError> {
    let da = line.a.total_degree().unwrap_or(0) as i64;
    let db = line.b.total_degree().unwrap_or(0) as i64;
    let samples: Vec<(BigRational, BigRational)> = (0..=da * db)
        .map(|k| {
            let t = int(k);
            let r = resultant(&line.restrict(&line.a, &t)?, &line.restrict(&line.b, &t)?);
            Ok((t, r))
        })
        .collect::<Result<_, PeriodicError>>()?;
    let r = interpolate(&samples);
    if r.is_zero() {
        return Ok(None);
    }
    let factors = square_free(&r);
    let total: u64 = factors
        .iter()
        .map(|(q, m)| q.degree().unwrap_or(0) as u64 * *m as u64)
        .sum();
    if total != expected {
        return Ok(None);
    }
    let mut points = Vec::new();
    for (q, mult) in &factors {
        for tau in roots(&q.to_complex()) {
            let exact_t = if super::upoly::is_real(tau) {
                rational_candidates(tau.re, opts.max_denominator)
                    .into_iter()
                    .rev()
                    .find(|c| q.eval(c).is_zero())
            } else {
                None
            };
            let point = match exact_t {
                Some(t) => {
                    let g = line
                        .restrict(&line.a, &t)?
                        .gcd(&line.restrict(&line.b, &t)?);
                    if g.degree() != Some(1) {
                        return Ok(None);
                    }
                    let x = -g.coefficients()[0].clone();
                    let y = &t - &line.lambda * &x;
                    let z = [x, y];
                    if !is_periodic_exact(f, &z, n) {
                        return Ok(None);
                    }
                    PeriodicPoint {
                        z: to_point(&z),
                        residual: 0.0,
                        multiplicity: *mult,
                        exact: Some(z),
                    }
                }
                None => {
                    let at = line.restrict_complex(&line.a, tau);
                    let bt = line.restrict_complex(&line.b, tau);
                    let lam = Complex64::new(crate::arith::to_f64(&line.lambda), 0.0);
                    let Some(x) = roots(&at.0)
                        .into_iter()
                        .min_by(|u, v| bt.eval(*u).norm().total_cmp(&bt.eval(*v).norm()))
                    else {
                        return Ok(None);
                    };
                    let guess = [x, tau - lam * x];
                    let z = if *mult == 1 {
                        match polish(f, guess, n, 60) {
                            Some(z) if dist(z, guess) <= 1e-4 * (1.0 + guess[1].norm()) => z,
                            _ => return Ok(None),
                        }
                    } else {
                        guess
                    };
                    let residual = f.residual(z, n);
                    if *mult == 1 && residual > opts.residual_tol {
                        return Ok(None);
                    }
                    PeriodicPoint { z, residual, multiplicity: *mult, exact: None }
                }
            };
            points.push(point);
        }
    }
    Ok(Some(points))
}

/// All points of period dividing `n` (at most `opts.n_cap`) with their
/// multiplicities; rational points carry exact coordinates.
pub fn fixed_points_exact(
    f: &HenonMap,
    n: u32,
    opts: &ExactOptions,
) -> Result<PeriodicSet, PeriodicError> {
    if n == 0 {
        return Err(PeriodicError::ZeroPeriod);
    }
    if n > opts.n_cap {
        return Err(PeriodicError::PeriodTooLarge { n, cap: opts.n_cap });
    }
    let fm = f.to_polymap().iterate(n)?;
    let a = fm.components()[0].sub(&MultiPoly::var(2, 0))?;
    let b = fm.components()[1].sub(&MultiPoly::var(2, 1))?;
    let expected = (f.degree() as u64).pow(n);
    for lambda in slopes() {
        if top_coefficient(&a, &lambda)?.is_zero() || top_coefficient(&b, &lambda)?.is_zero() {
            continue;
        }
        let line = Line { lambda, a: a.clone(), b: b.clone() };
        if let Some(mut points) = solve_on_line(f, n, &line, expected, opts)? {
            sort_points(&mut points);
            return Ok(PeriodicSet {
                map: f.to_string(),
                n,
                points,
                expected_count: expected,
                escape_radius: f.escape_radius(),
                seed: None,
            });
        }
    }
    Err(PeriodicError::Elimination(
        "no slope separated the periodic points".into(),
    ))
}
