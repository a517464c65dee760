//! Univariate polynomials over ℚ and ℂ: Euclid, resultants, interpolation,
//! square-free factorization and simultaneous root finding.

use crate::arith::to_f64;
use crate::poly::MultiPoly;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::ops::{Add, Mul};

/// Coefficients in ascending order, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly {
    c: Vec<BigRational>,
}

impl UPoly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn zero() -> Self {
        UPoly { c: Vec::new() }
    }

    pub fn constant(q: BigRational) -> Self {
        UPoly::new(vec![q])
    }

    /// `x − r`.
    pub fn linear(r: &BigRational) -> Self {
        UPoly::new(vec![-r.clone(), BigRational::one()])
    }

    /// A one-variable [`MultiPoly`] as a dense polynomial.
    pub fn from_multipoly(p: &MultiPoly) -> Self {
        assert_eq!(p.n_vars(), 1);
        let deg = p.total_degree().unwrap_or(0) as usize;
        let mut c = vec![BigRational::zero(); deg + 1];
        for (e, v) in p.terms() {
            c[e[0] as usize] = v.clone();
        }
        UPoly::new(c)
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> BigRational {
        self.c.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.c
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        UPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        UPoly::new(self.c.iter().map(|c| c * s).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lead().recip())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        UPoly::new(
            (0..n)
                .map(|i| {
                    self.c.get(i).cloned().unwrap_or_else(BigRational::zero)
                        - o.c.get(i).cloned().unwrap_or_else(BigRational::zero)
                })
                .collect(),
        )
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut c = vec![BigRational::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        UPoly::new(c)
    }

    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.c.len() - 1;
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (UPoly::zero(), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        let lead_inv = d.lead().recip();
        for k in (0..q.len()).rev() {
            let t = &r[k + dd] * &lead_inv;
            if !t.is_zero() {
                for (j, dc) in d.c.iter().enumerate() {
                    r[k + j] -= &t * dc;
                }
            }
            q[k] = t;
        }
        r.truncate(dd);
        (UPoly::new(q), UPoly::new(r))
    }

    /// Monic gcd.
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.c.iter().map(|c| Complex64::new(to_f64(c), 0.0)).collect()
    }

    /// Complex roots with multiplicity, by the Aberth iteration applied to
    /// the coefficients normalized by the leading one.
    pub fn complex_roots(&self) -> Vec<Complex64> {
        let lead = self.lead();
        let c: Vec<Complex64> = self
            .c
            .iter()
            .map(|x| Complex64::new(to_f64(&(x / &lead)), 0.0))
            .collect();
        roots(&c)
    }
}

/// `Res(a, b)` via the Euclidean remainder sequence.
pub fn resultant(a: &UPoly, b: &UPoly) -> BigRational {
    let (Some(mut da), Some(mut db)) = (a.degree(), b.degree()) else {
        return BigRational::zero();
    };
    let (mut a, mut b) = (a.clone(), b.clone());
    let mut acc = BigRational::one();
    loop {
        if db == 0 {
            return acc * b.lead().pow(da as i32);
        }
        let r = a.div_rem(&b).1;
        let Some(dr) = r.degree() else {
            return BigRational::zero();
        };
        // Res(a, b) = (−1)^{da·db} lc(b)^{da − dr} Res(b, r).
        if (da * db) % 2 == 1 {
            acc = -acc;
        }
        acc *= b.lead().pow((da - dr) as i32);
        a = b;
        b = r;
        da = db;
        db = dr;
    }
}

/// The polynomial of degree below `pts.len()` through the given points.
pub fn interpolate(pts: &[(BigRational, BigRational)]) -> UPoly {
    let n = pts.len();
    let xs: Vec<&BigRational> = pts.iter().map(|p| &p.0).collect();
    let mut coef: Vec<BigRational> = pts.iter().map(|p| p.1.clone()).collect();
    for j in 1..n {
        for i in (j..n).rev() {
            coef[i] = (&coef[i] - &coef[i - 1]) / (xs[i] - xs[i - j]);
        }
    }
    let mut out = UPoly::constant(coef[n - 1].clone());
    for i in (0..n - 1).rev() {
        out = out.mul(&UPoly::linear(xs[i]));
        let mut c = out.c.clone();
        if c.is_empty() {
            c.push(BigRational::zero());
        }
        c[0] += &coef[i];
        out = UPoly::new(c);
    }
    out
}

/// Yun's algorithm: `p = c · Π a_i^i` with each `a_i` monic, square-free and
/// pairwise coprime. Returns the nonconstant `(a_i, i)`.
pub fn square_free(p: &UPoly) -> Vec<(UPoly, u32)> {
    let mut out = Vec::new();
    if p.degree().unwrap_or(0) == 0 {
        return out;
    }
    let dp = p.derivative();
    let a0 = p.gcd(&dp);
    let mut b = p.div_rem(&a0).0;
    let mut c = dp.div_rem(&a0).0;
    let mut d = c.sub(&b.derivative());
    let mut i = 1;
    while b.degree().unwrap_or(0) > 0 {
        let a = b.gcd(&d);
        if a.degree().unwrap_or(0) > 0 {
            out.push((a.clone(), i));
        }
        b = b.div_rem(&a).0;
        c = d.div_rem(&a).0;
        d = c.sub(&b.derivative());
        i += 1;
    }
    out
}

/// Roots of `Σ c_k z^k` by the Aberth–Ehrlich iteration.
pub fn roots(c: &[Complex64]) -> Vec<Complex64> {
    let mut c = c.to_vec();
    while c.last().is_some_and(|z| z.norm() == 0.0) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let c: Vec<Complex64> = c.iter().map(|z| z / lead).collect();
    let dc: Vec<Complex64> = (1..=n).map(|k| c[k] * k as f64).collect();
    let eval = |p: &[Complex64], z: Complex64| p.iter().rev().fold(Complex64::new(0.0, 0.0), |a, b| a * z + b);
    let bound = 1.0 + c[..n].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(0.5 * bound.min(1e6), th)
        })
        .collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let pz = eval(&c, z[i]);
            let dz = eval(&dc, z[i]);
            if pz.norm() == 0.0 {
                continue;
            }
            let ratio = pz / dz;
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// A complex polynomial, used to expand bivariate polynomials on a line.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoly(pub Vec<Complex64>);

impl CPoly {
    pub fn constant(z: Complex64) -> Self {
        CPoly(vec![z])
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |a, b| a * z + b)
    }
}

impl Add for CPoly {
    type Output = CPoly;
    fn add(self, o: CPoly) -> CPoly {
        let n = self.0.len().max(o.0.len());
        let zero = Complex64::new(0.0, 0.0);
        CPoly(
            (0..n)
                .map(|i| *self.0.get(i).unwrap_or(&zero) + *o.0.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Mul for CPoly {
    type Output = CPoly;
    fn mul(self, o: CPoly) -> CPoly {
        if self.0.is_empty() || o.0.is_empty() {
            return CPoly(Vec::new());
        }
        let mut c = vec![Complex64::new(0.0, 0.0); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        CPoly(c)
    }
}

/// Continued-fraction convergents of `x` with denominator at most `max_den`.
pub fn rational_candidates(x: f64, max_den: i64) -> Vec<BigRational> {
    let mut out = Vec::new();
    if !x.is_finite() || x.abs() > 1e15 {
        return out;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 || k2 <= 0 {
            break;
        }
        out.push(BigRational::new(BigInt::from(h2), BigInt::from(k2)));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-12 {
            break;
        }
        r = 1.0 / frac;
    }
    out
}

pub fn is_real(z: Complex64) -> bool {
    z.im.abs() <= 1e-8 * (1.0 + z.re.abs())
}

pub fn abs_max(c: &[BigRational]) -> BigRational {
    c.iter()
        .map(|x| x.abs())
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a })
}
