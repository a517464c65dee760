//! Fixtures shared by the benchmarks.

use num_rational::BigRational;
use srpair_core::arith::rational;
use srpair_core::certificates::SearchOptions;
use srpair_core::green::AnalyzedPair;
use srpair_core::poly::{default_vars, parse_poly};
use srpair_core::PolyMap;

pub fn map(components: &[&str]) -> PolyMap {
    let vars = default_vars(components.len());
    PolyMap::new(components.iter().map(|c| parse_poly(c, &vars).unwrap()).collect()).unwrap()
}

/// `(y, y² − x)` and its inverse.
pub fn henon() -> (PolyMap, PolyMap) {
    (map(&["x2", "x2^2 - x1"]), map(&["x1^2 - x2", "x1"]))
}

pub fn henon_pair() -> AnalyzedPair {
    let (f, g) = henon();
    AnalyzedPair::new(&f, &g, &SearchOptions::default()).unwrap()
}

/// Points `(a/b, c/d)` spread over a few orders of magnitude.
pub fn sample_points(k: usize) -> Vec<Vec<BigRational>> {
    (0..k as i64)
        .map(|i| vec![rational(3 * i - 7, 1 + i % 5), rational(i * i + 1, 2 + i % 3)])
        .collect()
}
