//! Integer and rational helpers: valuations, local norms, logarithms of big
//! numbers and factorization of denominators.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("integer {0} is too large to factor (limit is 128 bits)")]
    TooLargeToFactor(BigInt),
    #[error("prime factor {0} does not fit in 64 bits")]
    PrimeTooLarge(u128),
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Multiplicity of `p` in a nonzero integer; `None` for zero.
pub fn valuation_int(n: &BigInt, p: u64) -> Option<i64> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut m = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        m = q;
        v += 1;
    }
}

/// `v_p(q)` for nonzero `q`; `None` for zero.
pub fn valuation(q: &BigRational, p: u64) -> Option<i64> {
    let vn = valuation_int(q.numer(), p)?;
    let vd = valuation_int(q.denom(), p).unwrap_or(0);
    Some(vn - vd)
}

/// The p-adic absolute value `p^{-v_p(q)}` as an exact rational (0 for 0).
pub fn padic_abs(q: &BigRational, p: u64) -> BigRational {
    match valuation(q, p) {
        None => BigRational::zero(),
        Some(v) => pow_rational(&BigRational::from_integer(BigInt::from(p)), -v),
    }
}

pub fn pow_rational(base: &BigRational, e: i64) -> BigRational {
    let mag = base.pow(e.unsigned_abs() as i32);
    if e < 0 {
        mag.recip()
    } else {
        mag
    }
}

/// Natural logarithm of a positive big integer, accurate to f64 precision
/// for any size.
pub fn ln_biguint(n: &BigUint) -> f64 {
    debug_assert!(!n.is_zero());
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::MAX);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_bigint_abs(n: &BigInt) -> f64 {
    ln_biguint(n.magnitude())
}

/// `ln |q|` for nonzero `q`.
pub fn ln_abs_rational(q: &BigRational) -> f64 {
    ln_bigint_abs(q.numer()) - ln_bigint_abs(q.denom())
}

/// `ln max(|q|, 1)`.
pub fn ln_plus_abs(q: &BigRational) -> f64 {
    if q.is_zero() || q.abs() <= BigRational::one() {
        0.0
    } else {
        ln_abs_rational(q)
    }
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Ratios too large for the direct conversion.
        let l = ln_abs_rational(q);
        let s = if q.is_negative() { -1.0 } else { 1.0 };
        s * l.exp()
    })
}

pub fn is_prime(p: u64) -> bool {
    num_prime::nt_funcs::is_prime64(p)
}

/// Distinct prime factors of a nonzero integer, ascending.
pub fn prime_factors(n: &BigInt) -> Result<Vec<u64>, ArithError> {
    let m = n.magnitude();
    if m.is_zero() || m.is_one() {
        return Ok(Vec::new());
    }
    let small = m
        .to_u128()
        .ok_or_else(|| ArithError::TooLargeToFactor(n.clone()))?;
    let mut out = BTreeSet::new();
    for (p, _) in num_prime::nt_funcs::factorize128(small) {
        out.insert(u64::try_from(p).map_err(|_| ArithError::PrimeTooLarge(p))?);
    }
    Ok(out.into_iter().collect())
}

pub fn lcm_denominators<'a>(qs: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    qs.into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

pub fn gcd_numerators<'a>(qs: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    qs.into_iter()
        .fold(BigInt::zero(), |acc, q| acc.gcd(q.numer()))
}

/// Compare `|a|` against `|b|` without allocating a new rational when possible.
pub fn cmp_abs(a: &BigRational, b: &BigRational) -> Ordering {
    a.abs().cmp(&b.abs())
}

/// Reduce a rational modulo `p`; `None` if `p` divides the denominator.
pub fn reduce_mod_p(q: &BigRational, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let d = q.denom().mod_floor(&pb);
    if d.is_zero() {
        return None;
    }
    let n = q.numer().mod_floor(&pb).to_u64()?;
    let d = d.to_u64()?;
    Some(mulmod(n, inv_mod(d, p)?, p))
}

pub fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn inv_mod(a: u64, p: u64) -> Option<u64> {
    let (g, x, _) = egcd(a as i128, p as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(p as i128) as u64)
}

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = egcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Modular inverse of a big integer modulo `m` (both nonnegative).
pub fn inv_mod_big(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// Sign-aware conversion used by printers.
pub fn is_negative(q: &BigRational) -> bool {
    q.numer().sign() == Sign::Minus
}
