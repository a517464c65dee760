//! Real scalars for archimedean iteration: hardware `f64` and a 256-bit
//! binary float.

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Real:
    Clone
    + fmt::Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Relative rounding error of one operation.
    const UNIT_ROUNDOFF: f64;

    fn from_f64(x: f64) -> Self;
    fn from_rational(q: &BigRational) -> Self;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;
    fn is_finite(&self) -> bool;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

    fn from_f64(x: f64) -> Self {
        x
    }

    fn from_rational(q: &BigRational) -> Self {
        crate::arith::to_f64(q)
    }

    fn ln(&self) -> Self {
        f64::ln(*self)
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

/// Working precision of [`Hp`] in bits.
pub const HP_BITS: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// A 256-bit binary floating-point number (about 77 decimal digits).
#[derive(Clone, PartialEq)]
pub struct Hp(pub BigFloat);

impl Hp {
    pub fn parse(s: &str) -> Hp {
        Hp(with_consts(|cc| BigFloat::parse(s, Radix::Dec, HP_BITS, RM, cc)))
    }

    /// Decimal rendering with all working digits.
    pub fn to_decimal(&self) -> String {
        with_consts(|cc| self.0.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into())
    }
}

impl fmt::Debug for Hp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl fmt::Display for Hp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl PartialOrd for Hp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl Add for Hp {
    type Output = Hp;
    fn add(self, o: Hp) -> Hp {
        Hp(self.0.add(&o.0, HP_BITS, RM))
    }
}

impl Sub for Hp {
    type Output = Hp;
    fn sub(self, o: Hp) -> Hp {
        Hp(self.0.sub(&o.0, HP_BITS, RM))
    }
}

impl Mul for Hp {
    type Output = Hp;
    fn mul(self, o: Hp) -> Hp {
        Hp(self.0.mul(&o.0, HP_BITS, RM))
    }
}

impl Div for Hp {
    type Output = Hp;
    fn div(self, o: Hp) -> Hp {
        Hp(self.0.div(&o.0, HP_BITS, RM))
    }
}

impl Neg for Hp {
    type Output = Hp;
    fn neg(self) -> Hp {
        Hp(self.0.neg())
    }
}

fn bigint_to_hp(n: &num_bigint::BigInt) -> BigFloat {
    with_consts(|cc| BigFloat::parse(&n.to_string(), Radix::Dec, HP_BITS, RM, cc))
}

impl Real for Hp {
    const UNIT_ROUNDOFF: f64 = 8.7e-78;

    fn from_f64(x: f64) -> Self {
        Hp(BigFloat::from_f64(x, HP_BITS))
    }

    fn from_rational(q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        let n = bigint_to_hp(q.numer());
        let d = bigint_to_hp(q.denom());
        Hp(n.div(&d, HP_BITS, RM))
    }

    fn ln(&self) -> Self {
        Hp(with_consts(|cc| self.0.ln(HP_BITS, RM, cc)))
    }

    fn exp(&self) -> Self {
        Hp(with_consts(|cc| self.0.exp(HP_BITS, RM, cc)))
    }

    fn abs(&self) -> Self {
        Hp(self.0.abs())
    }

    fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        match self.0.as_raw_parts() {
            None => f64::NAN,
            Some((m, _, sign, e, _)) => {
                let Some(top) = m.last() else { return 0.0 };
                if *top == 0 {
                    return 0.0;
                }
                // The mantissa is normalized to [1/2, 1) times 2^e.
                let frac = *top as f64 / 2f64.powi(astro_float::WORD_BIT_SIZE as i32);
                let v = frac * 2f64.powi(e);
                if sign == Sign::Neg {
                    -v
                } else {
                    v
                }
            }
        }
    }

    fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }
}

/// `|q|` as a real of type `R`, used for exact constants.
pub fn abs_rational<R: Real>(q: &BigRational) -> R {
    R::from_rational(&q.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational;

    #[test]
    fn hp_round_trips_simple_values() {
        assert_eq!(Hp::from_f64(1.5).to_f64(), 1.5);
        assert_eq!(Hp::from_f64(-0.375).to_f64(), -0.375);
        assert_eq!(Hp::zero().to_f64(), 0.0);
        let third = Hp::from_rational(&rational(1, 3));
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn hp_logs_are_precise() {
        let l5 = Hp::from_f64(5.0).ln();
        let expected = Hp::parse("1.6094379124341003746007593332261876395256013542685177219126478914741789877076577646301338780931796107999663030217155628997240052293246418661");
        let diff = (l5.clone() - expected).abs();
        assert!(diff < Hp::parse("1e-70"), "{diff:?}");
        let back = l5.exp();
        assert!((back.to_f64() - 5.0).abs() < 1e-15);
        assert!(Hp::from_f64(2.0) > Hp::from_f64(1.0));
    }
}
