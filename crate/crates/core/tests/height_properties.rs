mod common;

use common::*;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srpair_core::certificates::SearchOptions;
use srpair_core::green::{AnalyzedPair, GreenOptions, Member};
use srpair_core::heights::{canonical_height_forward, canonical_height_pair, naive_height};
use srpair_core::periodic::{fixed_points_exact, ExactOptions, HenonMap};
use srpair_core::Place;
use std::sync::OnceLock;

fn henon_pair_for(h: &HenonMap) -> AnalyzedPair {
    AnalyzedPair::new(&h.to_polymap(), &h.inverse(), &SearchOptions::default()).unwrap()
}

fn pair() -> &'static AnalyzedPair {
    static PAIR: OnceLock<AnalyzedPair> = OnceLock::new();
    PAIR.get_or_init(|| henon_pair_for(&HenonMap::quadratic(q(0, 1))))
}

fn opts() -> GreenOptions {
    GreenOptions::with_tol(1e-10)
}

fn arb_point() -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec((-300i64..=300, 1i64..=40).prop_map(|(n, d)| q(n, d)), 2)
}

proptest! {
    #![proptest_config(cases(150))]

    #[test]
    fn heights_are_nonnegative(x in arb_point()) {
        let h = canonical_height_pair(pair(), &x, &opts()).unwrap();
        prop_assert!(h.value >= -h.error.value());
        let hf = canonical_height_forward(pair(), &x, &opts()).unwrap();
        prop_assert!(hf.value >= -hf.error.value());
    }

    #[test]
    fn forward_height_scales_by_degree(x in arb_point()) {
        let fx = pair().map(Member::First).eval(&x).unwrap();
        let h = canonical_height_forward(pair(), &x, &opts()).unwrap();
        let hf = canonical_height_forward(pair(), &fx, &opts()).unwrap();
        prop_assert!(h.is_rigorous() && hf.is_rigorous());
        let bound = hf.error.value() + 2.0 * h.error.value() + 1e-12 * (1.0 + hf.value);
        prop_assert!((hf.value - 2.0 * h.value).abs() <= bound);
    }

    #[test]
    fn total_error_respects_tolerance(x in arb_point()) {
        let h = canonical_height_pair(pair(), &x, &opts()).unwrap();
        if h.is_rigorous() {
            prop_assert!(h.error.value() <= 1e-10);
        }
        prop_assert_eq!(h.places[0].place, Place::Archimedean);
    }
}

#[test]
fn periodic_rational_points_have_height_zero() {
    for c in [0, -3] {
        let h = HenonMap::quadratic(q(c, 1));
        let pair = henon_pair_for(&h);
        let mut seen = 0;
        for n in 1..=3 {
            for x in fixed_points_exact(&h, n, &ExactOptions::default()).unwrap().rational_points() {
                let v = canonical_height_pair(&pair, &x, &opts()).unwrap();
                assert!(v.value <= v.error.value(), "c = {c}, x = {x:?}: {}", v.value);
                seen += 1;
            }
        }
        assert!(seen >= 2, "c = {c}");
    }
}

fn coprime_point(rng: &mut impl Rng, bound: i64) -> Vec<BigRational> {
    loop {
        let z = rng.gen_range(1..=bound);
        let a = rng.gen_range(-bound..=bound);
        let b = rng.gen_range(-bound..=bound);
        if z.gcd(&a).gcd(&b) == 1 {
            return vec![q(a, z), q(b, z)];
        }
    }
}

fn weil_gap(points: &[Vec<BigRational>]) -> f64 {
    points
        .iter()
        .map(|x| {
            let h = canonical_height_pair(pair(), x, &opts()).unwrap();
            (h.value - naive_height(x).value).abs()
        })
        .fold(0.0, f64::max)
}

/// The canonical and naive heights differ by a bounded amount. The
/// archimedean tail constants of the two maps bound the gap, and extending
/// the sample from naive height 50 to 60 stays below that bound.
#[test]
fn weil_comparison_is_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let small: Vec<_> = (0..100).map(|_| coprime_point(&mut rng, 50)).collect();
    for x in &small {
        assert!(naive_height(x).max <= BigInt::from(50));
    }
    let mut large = small.clone();
    large.extend((0..100).map(|_| coprime_point(&mut rng, 60)));
    let (m50, m60) = (weil_gap(&small), weil_gap(&large));
    let bound = [Member::First, Member::Second]
        .iter()
        .map(|&m| {
            let tc = pair().tail_constants(m, Place::Archimedean);
            tc.upper_constant().max(-tc.lower_constant())
        })
        .fold(0.0, f64::max);
    println!("max |h - h_naive|: {m50:.6} at height 50, {m60:.6} at height 60, bound {bound:.6}");
    assert!(m50 <= bound && m60 <= bound);
    assert!(m60 <= m50 + 1e-9, "the observed gap grew");
}
