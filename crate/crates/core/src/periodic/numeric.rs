//! Multi-start Newton for `f^n(z) = z`.
//!
//! A period-n orbit is determined by its second coordinates `y_0, …, y_{n−1}`
//! since `x_k = y_{k−1}`. The orbit equations are
//! `E_k = y_{k+1} − p(y_k) + a·y_{k−1} = 0` with indices mod `n`, a sparse
//! system that stays well conditioned where `f^n` itself does not.

use super::{dedupe_indices, sort_points, HenonMap, PeriodicError, PeriodicPoint, PeriodicSet, Point};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct NumericOptions {
    pub dedupe_tol: f64,
    pub residual_tol: f64,
    pub seed: u64,
    /// Quasi-random starts tried before giving up.
    pub max_starts: u64,
    pub batch: usize,
    pub newton_steps: u32,
    /// Stop after this many consecutive batches add no point.
    pub stall_batches: u32,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions {
            dedupe_tol: 1e-8,
            residual_tol: 1e-10,
            seed: 0,
            max_starts: 64u64.pow(4),
            batch: 2048,
            newton_steps: 60,
            stall_batches: 64,
        }
    }
}

fn primes(k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    let mut c = 2u64;
    while out.len() < k {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let (mut f, mut r) = (inv, 0.0);
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

/// Shifted Halton points in `[−r, r]^{2n}` read as `n` complex numbers.
struct Starts {
    bases: Vec<u64>,
    shift: Vec<f64>,
    r: f64,
}

impl Starts {
    fn new(n: usize, r: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Starts {
            bases: primes(2 * n),
            shift: (0..2 * n).map(|_| rng.gen::<f64>()).collect(),
            r,
        }
    }

    fn get(&self, i: u64) -> Vec<Complex64> {
        let u: Vec<f64> = self
            .bases
            .iter()
            .zip(&self.shift)
            .map(|(&b, s)| {
                let v = radical_inverse(i + 1, b) + s;
                self.r * (2.0 * (v - v.floor()) - 1.0)
            })
            .collect();
        u.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
    }
}

fn orbit_equations(f: &HenonMap, y: &[Complex64]) -> DVector<Complex64> {
    let n = y.len();
    let a = f.a_complex();
    DVector::from_iterator(
        n,
        (0..n).map(|k| y[(k + 1) % n] - f.p_complex(y[k]) + a * y[(k + n - 1) % n]),
    )
}

fn orbit_jacobian(f: &HenonMap, y: &[Complex64]) -> DMatrix<Complex64> {
    let n = y.len();
    let a = f.a_complex();
    let mut j = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for k in 0..n {
        j[(k, (k + 1) % n)] += Complex64::new(1.0, 0.0);
        j[(k, k)] -= f.dp_complex(y[k]);
        j[(k, (k + n - 1) % n)] += a;
    }
    j
}

/// Newton on the orbit equations from `y`; `None` on divergence, a
/// singular step, or no convergence within `steps`.
pub fn newton_orbit(f: &HenonMap, mut y: Vec<Complex64>, steps: u32) -> Option<Vec<Complex64>> {
    let bound = 1e3 * f.escape_radius();
    for _ in 0..steps {
        let e = orbit_equations(f, &y);
        let dy = orbit_jacobian(f, &y).lu().solve(&e)?;
        let mut change = 0.0f64;
        for (yi, d) in y.iter_mut().zip(dy.iter()) {
            *yi -= d;
            change = change.max(d.norm() / (1.0 + yi.norm()));
        }
        if !change.is_finite() || y.iter().any(|v| v.norm() > bound) {
            return None;
        }
        if change < 1e-14 {
            return well_conditioned(f, &y).then_some(y);
        }
    }
    None
}

/// Near a multiple root the orbit Jacobian is nearly singular and rounding
/// leaves Newton scattered around the true point; such solutions are dropped.
fn well_conditioned(f: &HenonMap, y: &[Complex64]) -> bool {
    let sv = orbit_jacobian(f, y).singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    min > 1e-8 * max
}

/// The `n` cyclic shifts `(y_{k−1}, y_k)` of a solved orbit.
fn orbit_points(y: &[Complex64]) -> Vec<Point> {
    let n = y.len();
    (0..n).map(|k| [y[(k + n - 1) % n], y[k]]).collect()
}

/// Refine an approximate period-n point with Newton on its orbit.
pub fn polish(f: &HenonMap, z: Point, n: u32, steps: u32) -> Option<Point> {
    let mut y = Vec::with_capacity(n as usize);
    let mut w = z;
    for _ in 0..n {
        y.push(w[1]);
        w = f.eval_complex(w);
    }
    let y = newton_orbit(f, y, steps)?;
    Some([y[n as usize - 1], y[0]])
}

/// Periodic points of period dividing `n`, searched from quasi-random
/// starts in the filtration bidisk until `d^n` distinct points are found or
/// the start budget runs out. Incomplete sets are returned as such.
pub fn periodic_points_numeric(
    f: &HenonMap,
    n: u32,
    opts: &NumericOptions,
) -> Result<PeriodicSet, PeriodicError> {
    if n == 0 {
        return Err(PeriodicError::ZeroPeriod);
    }
    let expected = (f.degree() as u64).pow(n);
    let starts = Starts::new(n as usize, f.escape_radius(), opts.seed);
    let mut found: Vec<PeriodicPoint> = Vec::new();
    let mut next = 0u64;
    let mut stalled = 0;
    while (found.len() as u64) < expected && next < opts.max_starts && stalled < opts.stall_batches {
        let before = found.len();
        let end = (next + opts.batch as u64).min(opts.max_starts);
        let batch: Vec<Vec<(Point, f64)>> = (next..end)
            .into_par_iter()
            .map(|i| {
                let Some(y) = newton_orbit(f, starts.get(i), opts.newton_steps) else {
                    return Vec::new();
                };
                orbit_points(&y)
                    .into_iter()
                    .map(|z| (z, f.residual(z, n)))
                    .filter(|(_, r)| *r <= opts.residual_tol)
                    .collect()
            })
            .collect();
        next = end;
        for (z, residual) in batch.into_iter().flatten() {
            if !found.iter().any(|p| super::dist(p.z, z) <= opts.dedupe_tol) {
                found.push(PeriodicPoint { z, residual, multiplicity: 1, exact: None });
            }
        }
        stalled = if found.len() > before { 0 } else { stalled + 1 };
    }
    // Re-dedupe in sorted order so the result does not depend on the order
    // in which batches happened to fill the set.
    let coords: Vec<Point> = found.iter().map(|p| p.z).collect();
    let keep = dedupe_indices(&coords, opts.dedupe_tol);
    let mut points: Vec<PeriodicPoint> = keep.into_iter().map(|i| found[i].clone()).collect();
    sort_points(&mut points);
    Ok(PeriodicSet {
        map: f.to_string(),
        n,
        points,
        expected_count: expected,
        escape_radius: f.escape_radius(),
        seed: Some(opts.seed),
    })
}
