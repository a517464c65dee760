#![allow(dead_code)]

use astro_float::{BigFloat, Consts, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use srpair_core::poly::{default_vars, parse_poly};
use srpair_core::PolyMap;

pub fn map(components: &[&str]) -> PolyMap {
    let vars = default_vars(components.len());
    PolyMap::new(components.iter().map(|c| parse_poly(c, &vars).unwrap()).collect()).unwrap()
}

/// `f(x, y) = (y, y² − x)` and its inverse.
pub fn henon() -> (PolyMap, PolyMap) {
    (map(&["x2", "x2^2 - x1"]), map(&["x1^2 - x2", "x1"]))
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn random_rational(rng: &mut impl Rng, num: i64, den: i64) -> BigRational {
    q(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

/// Points spread over many scales: `±m·10^e` with `e ∈ [−4, 6]`.
pub fn random_scaled(rng: &mut impl Rng) -> BigRational {
    let m = q(rng.gen_range(-1000..=1000), rng.gen_range(1..=97));
    let e: i32 = rng.gen_range(-4..=6);
    let ten = BigRational::from_integer(BigInt::from(10));
    if e >= 0 {
        m * num_traits::pow(ten, e as usize)
    } else {
        m / num_traits::pow(ten, (-e) as usize)
    }
}

const BITS: usize = 320;
const RM: RoundingMode = RoundingMode::ToEven;

/// `G_f(x, y)` for `f = (y, y² − x)` (or its inverse) from the homogeneous
/// lift `(X0, X1, X2) ↦ (X0², X0·X2, X2² − X0·X1)`: with `u_k` the
/// normalized orbit, `G = Σ_k ln ‖F(u_{k−1})‖ / 2^k`. Returns a decimal
/// string.
pub fn henon_green_oracle(x: i64, y: i64, inverse: bool, steps: usize) -> String {
    let mut cc = Consts::new().unwrap();
    let bf = |v: i64| BigFloat::from_i64(v, BITS);
    let norm = |u: &[BigFloat; 3]| {
        let mut m = u[0].abs();
        for c in &u[1..] {
            if c.abs() > m {
                m = c.abs();
            }
        }
        m
    };
    let mut u = [bf(1), bf(x), bf(y)];
    let mut total = BigFloat::from_i64(0, BITS);
    let mut weight = BigFloat::from_i64(1, BITS);
    let half = BigFloat::from_f64(0.5, BITS);
    for k in 0..=steps {
        if k > 0 {
            let x0 = u[0].mul(&u[0], BITS, RM);
            u = if inverse {
                let x1 = u[1].mul(&u[1], BITS, RM).sub(&u[0].mul(&u[2], BITS, RM), BITS, RM);
                [x0, x1, u[0].mul(&u[1], BITS, RM)]
            } else {
                let x2 = u[2].mul(&u[2], BITS, RM).sub(&u[0].mul(&u[1], BITS, RM), BITS, RM);
                [x0, u[0].mul(&u[2], BITS, RM), x2]
            };
            weight = weight.mul(&half, BITS, RM);
        }
        let s = norm(&u);
        total = total.add(&s.ln(BITS, RM, &mut cc).mul(&weight, BITS, RM), BITS, RM);
        for c in u.iter_mut() {
            *c = c.div(&s, BITS, RM);
        }
    }
    total.format(astro_float::Radix::Dec, RM, &mut cc).unwrap()
}

/// `|a − b|` for two decimal strings, computed at oracle precision.
pub fn decimal_gap(a: &str, b: &str) -> f64 {
    let mut cc = Consts::new().unwrap();
    let pa = BigFloat::parse(a, astro_float::Radix::Dec, BITS, RM, &mut cc);
    let pb = BigFloat::parse(b, astro_float::Radix::Dec, BITS, RM, &mut cc);
    let gap = pa.sub(&pb, BITS, RM).abs();
    let s = gap.format(astro_float::Radix::Dec, RM, &mut cc).unwrap();
    s.parse::<f64>().unwrap_or(f64::NAN)
}

/// Proptest settings for integration tests, which have no source file to
/// persist failures next to.
pub fn cases(n: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases: n,
        failure_persistence: None,
        ..Default::default()
    }
}
