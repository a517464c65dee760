//! p-adic numbers with capped absolute precision.
//!
//! A value is `p^v · u + O(p^prec)` with `u` a unit modulo `p^{prec − v}`.
//! A value known only to be `O(p^prec)` has `u = 0` and `v = prec`. Exact
//! zero has `v = prec = INF`.

use crate::arith::{inv_mod_big, valuation_int};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::ops::{Add, Mul, Neg};

pub const INF: i64 = i64::MAX / 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Padic {
    p: u64,
    v: i64,
    unit: BigInt,
    prec: i64,
}

fn pk(p: u64, k: i64) -> BigInt {
    num_traits::pow(BigInt::from(p), k.max(0) as usize)
}

impl Padic {
    pub fn exact_zero(p: u64) -> Self {
        Padic {
            p,
            v: INF,
            unit: BigInt::zero(),
            prec: INF,
        }
    }

    /// `q` to `rel` digits of relative precision.
    pub fn from_rational(q: &BigRational, p: u64, rel: i64) -> Self {
        if q.is_zero() {
            return Self::exact_zero(p);
        }
        let a = valuation_int(q.numer(), p).expect("nonzero");
        let b = valuation_int(q.denom(), p).expect("nonzero");
        let pb = BigInt::from(p);
        let num = q.numer() / num_traits::pow(pb.clone(), a as usize);
        let den = q.denom() / num_traits::pow(pb, b as usize);
        let modulus = pk(p, rel);
        let inv = inv_mod_big(&den, &modulus).expect("unit denominator");
        let unit = (num * inv).mod_floor(&modulus);
        Padic {
            p,
            v: a - b,
            unit,
            prec: a - b + rel,
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_exact_zero(&self) -> bool {
        self.prec >= INF
    }

    /// True when the value is only known to be `O(p^prec)`.
    pub fn is_indistinct(&self) -> bool {
        !self.is_exact_zero() && self.unit.is_zero()
    }

    /// The valuation, or a lower bound for it when indistinct.
    pub fn valuation(&self) -> i64 {
        self.v
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn relative_precision(&self) -> i64 {
        self.prec - self.v
    }

    /// The leading digit `u mod p`, zero when indistinct.
    pub fn leading_digit(&self) -> u64 {
        use num_traits::ToPrimitive;
        (&self.unit % BigInt::from(self.p)).to_u64().unwrap_or(0)
    }

    fn indistinct(p: u64, prec: i64) -> Self {
        Padic {
            p,
            v: prec,
            unit: BigInt::zero(),
            prec,
        }
    }

    /// Normalize `p^v · s + O(p^prec)` for an arbitrary integer `s`.
    fn normalize(p: u64, v: i64, s: BigInt, prec: i64) -> Self {
        if v >= prec {
            return Self::indistinct(p, prec);
        }
        let modulus = pk(p, prec - v);
        let s = s.mod_floor(&modulus);
        match valuation_int(&s, p) {
            None => Self::indistinct(p, prec),
            Some(k) => {
                let v2 = v + k;
                if v2 >= prec {
                    return Self::indistinct(p, prec);
                }
                let unit = (s / pk(p, k)).mod_floor(&pk(p, prec - v2));
                Padic {
                    p,
                    v: v2,
                    unit,
                    prec,
                }
            }
        }
    }
}

impl Add for &Padic {
    type Output = Padic;

    fn add(self, o: &Padic) -> Padic {
        if self.is_exact_zero() {
            return o.clone();
        }
        if o.is_exact_zero() {
            return self.clone();
        }
        let prec = self.prec.min(o.prec);
        let vmin = self.v.min(o.v);
        let mut s = BigInt::zero();
        for x in [self, o] {
            if x.v < prec && !x.unit.is_zero() {
                s += &x.unit * pk(x.p, x.v - vmin);
            }
        }
        Padic::normalize(self.p, vmin, s, prec)
    }
}

impl Mul for &Padic {
    type Output = Padic;

    fn mul(self, o: &Padic) -> Padic {
        if self.is_exact_zero() || o.is_exact_zero() {
            return Padic::exact_zero(self.p);
        }
        let v = self.v + o.v;
        let rel = self.relative_precision().min(o.relative_precision());
        Padic::normalize(self.p, v, &self.unit * &o.unit, v + rel)
    }
}

impl Neg for &Padic {
    type Output = Padic;

    fn neg(self) -> Padic {
        if self.is_exact_zero() || self.unit.is_zero() {
            return self.clone();
        }
        let modulus = pk(self.p, self.relative_precision());
        Padic {
            p: self.p,
            v: self.v,
            unit: (-&self.unit).mod_floor(&modulus),
            prec: self.prec,
        }
    }
}

impl Add for Padic {
    type Output = Padic;
    fn add(self, o: Padic) -> Padic {
        &self + &o
    }
}

impl Mul for Padic {
    type Output = Padic;
    fn mul(self, o: Padic) -> Padic {
        &self * &o
    }
}

/// Valuation data of a vector: `Some(v_min)` when the smallest valuation
/// is attained by a coordinate known to precision, `None` if precision was
/// lost on the dominant coordinate. An exact zero vector has `v_min = INF`.
pub fn min_valuation(xs: &[Padic]) -> Option<i64> {
    let determinate = xs
        .iter()
        .filter(|x| !x.is_indistinct())
        .map(|x| x.v)
        .min()
        .unwrap_or(INF);
    let lower = xs
        .iter()
        .filter(|x| x.is_indistinct())
        .map(|x| x.v)
        .min()
        .unwrap_or(INF);
    // An indistinct coordinate below the determinate minimum could hide the
    // true norm, unless the vector is already known to be integral.
    if lower < determinate && lower < 0 {
        None
    } else {
        Some(lower.min(determinate))
    }
}

impl Padic {
    /// Reduce relative precision to at most `rel` digits.
    pub fn truncated(mut self, rel: i64) -> Padic {
        if self.is_exact_zero() || self.relative_precision() <= rel {
            return self;
        }
        self.prec = self.v + rel;
        self.unit = self.unit.mod_floor(&pk(self.p, rel));
        self
    }

    /// Sign-symmetric residue of the unit, for display and tests.
    pub fn to_rational_approx(&self) -> BigRational {
        if self.is_exact_zero() || self.unit.is_zero() {
            return BigRational::zero();
        }
        let m = pk(self.p, self.relative_precision());
        let half = &m / 2;
        let u = if self.unit > half { &self.unit - &m } else { self.unit.clone() };
        let scale = if self.v >= 0 {
            BigRational::from_integer(pk(self.p, self.v))
        } else {
            BigRational::new(BigInt::one(), pk(self.p, -self.v))
        };
        BigRational::from_integer(u) * scale
    }
}
