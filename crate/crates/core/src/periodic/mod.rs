//! Periodic points of plane Hénon maps `(x, y) ↦ (y, p(y) − a·x)` and the
//! empirical measures they carry.

pub mod exact;
pub mod numeric;
pub mod upoly;

use crate::arith::to_f64;
use crate::poly::{format_poly, MultiPoly, PolyError, PolyMap};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::fmt::Write as _;
use thiserror::Error;

pub use exact::{fixed_points_exact, ExactOptions};
pub use numeric::{periodic_points_numeric, NumericOptions};

#[derive(Debug, Error)]
pub enum PeriodicError {
    #[error("not a Hénon map (y, p(y) - a*x): {0}")]
    NotHenon(String),
    #[error("period {n} exceeds the exact cap {cap}")]
    PeriodTooLarge { n: u32, cap: u32 },
    #[error("period must be positive")]
    ZeroPeriod,
    #[error("empty point set")]
    Empty,
    #[error("elimination failed: {0}")]
    Elimination(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

pub type Point = [Complex64; 2];

/// `(x, y) ↦ (y, p(y) − a·x)` over ℚ, with `deg p ≥ 2` and `a ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct HenonMap {
    p: Vec<BigRational>,
    a: BigRational,
    p_c: Vec<Complex64>,
    a_c: Complex64,
}

impl HenonMap {
    /// `p` by ascending coefficients.
    pub fn new(p: Vec<BigRational>, a: BigRational) -> Result<Self, PeriodicError> {
        let p = upoly::UPoly::new(p).coefficients().to_vec();
        if p.len() < 3 {
            return Err(PeriodicError::NotHenon("deg p < 2".into()));
        }
        if a.is_zero() {
            return Err(PeriodicError::NotHenon("a = 0".into()));
        }
        let p_c = p.iter().map(|c| Complex64::new(to_f64(c), 0.0)).collect();
        let a_c = Complex64::new(to_f64(&a), 0.0);
        Ok(HenonMap { p, a, p_c, a_c })
    }

    /// `p(y) = y² + c`, `a = 1`.
    pub fn quadratic(c: BigRational) -> Self {
        HenonMap::new(vec![c, BigRational::zero(), BigRational::one()], BigRational::one())
            .expect("quadratic Hénon map")
    }

    /// `p(y) = y² − 6`, `a = 1`.
    pub fn horseshoe() -> Self {
        HenonMap::quadratic(BigRational::from_integer((-6).into()))
    }

    pub fn from_map(f: &PolyMap) -> Result<Self, PeriodicError> {
        if f.dim() != 2 {
            return Err(PeriodicError::NotHenon(format!("dimension {}", f.dim())));
        }
        let c = f.components();
        if c[0] != MultiPoly::var(2, 1) {
            return Err(PeriodicError::NotHenon("first component is not y".into()));
        }
        let mut p = Vec::new();
        let mut a = BigRational::zero();
        for (e, v) in c[1].terms() {
            match (e[0], e[1]) {
                (1, 0) => a = -v.clone(),
                (0, k) => {
                    let k = k as usize;
                    if p.len() <= k {
                        p.resize(k + 1, BigRational::zero());
                    }
                    p[k] = v.clone();
                }
                _ => return Err(PeriodicError::NotHenon("mixed or nonlinear x term".into())),
            }
        }
        HenonMap::new(p, a)
    }

    pub fn p(&self) -> &[BigRational] {
        &self.p
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn degree(&self) -> u32 {
        (self.p.len() - 1) as u32
    }

    fn p_poly(&self, var: usize) -> MultiPoly {
        let terms = self.p.iter().enumerate().map(|(k, c)| {
            let mut e = vec![0u32; 2];
            e[var] = k as u32;
            (e, c.clone())
        });
        MultiPoly::from_terms(2, terms).expect("two variables")
    }

    pub fn to_polymap(&self) -> PolyMap {
        let x = MultiPoly::var(2, 0);
        let second = self.p_poly(1).sub(&x.scale(&self.a)).expect("same ring");
        PolyMap::new(vec![MultiPoly::var(2, 1), second]).expect("plane map")
    }

    /// `(u, v) ↦ ((p(u) − v)/a, u)`.
    pub fn inverse(&self) -> PolyMap {
        let v = MultiPoly::var(2, 1);
        let first = self
            .p_poly(0)
            .sub(&v)
            .expect("same ring")
            .scale(&self.a.recip());
        PolyMap::new(vec![first, MultiPoly::var(2, 0)]).expect("plane map")
    }

    /// `R = 1 + |a| + max |coefficient of p|`; every bounded orbit stays in
    /// the bidisk of radius `R`.
    pub fn escape_radius(&self) -> f64 {
        let m = upoly::abs_max(&self.p);
        1.0 + to_f64(&self.a.abs()) + to_f64(&m)
    }

    pub fn p_complex(&self, y: Complex64) -> Complex64 {
        self.p_c.iter().rev().fold(Complex64::zero(), |acc, c| acc * y + c)
    }

    pub fn dp_complex(&self, y: Complex64) -> Complex64 {
        let n = self.p_c.len();
        (1..n)
            .rev()
            .fold(Complex64::zero(), |acc, k| acc * y + self.p_c[k] * k as f64)
    }

    pub fn a_complex(&self) -> Complex64 {
        self.a_c
    }

    pub fn eval_complex(&self, z: Point) -> Point {
        [z[1], self.p_complex(z[1]) - self.a_c * z[0]]
    }

    pub fn iterate_complex(&self, mut z: Point, n: u32) -> Point {
        for _ in 0..n {
            z = self.eval_complex(z);
        }
        z
    }

    pub fn eval_rational(&self, z: &[BigRational; 2]) -> [BigRational; 2] {
        let py = self
            .p
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * &z[1] + c);
        [z[1].clone(), py - &self.a * &z[0]]
    }

    /// `‖f^n(z) − z‖` in the max norm.
    pub fn residual(&self, z: Point, n: u32) -> f64 {
        let w = self.iterate_complex(z, n);
        dist(w, z)
    }
}

impl fmt::Display for HenonMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = MultiPoly::from_terms(
            1,
            self.p.iter().enumerate().map(|(k, c)| (vec![k as u32], c.clone())),
        )
        .expect("one variable");
        write!(f, "(y, p(y) - a*x) with p(y) = {}, a = {}", format_poly(&p, &["y".into()]), self.a)
    }
}

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).norm().max((a[1] - b[1]).norm())
}

fn point_cmp(a: &Point, b: &Point) -> std::cmp::Ordering {
    let key = |z: &Point| [z[0].re, z[0].im, z[1].re, z[1].im];
    key(a)
        .iter()
        .zip(key(b).iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Indices of the points kept after sorting and dropping every point within
/// `tol` of an earlier kept one.
fn dedupe_indices(points: &[Point], tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| point_cmp(&points[i], &points[j]));
    let mut kept: Vec<usize> = Vec::new();
    for i in idx {
        if !kept.iter().any(|&k| dist(points[k], points[i]) <= tol) {
            kept.push(i);
        }
    }
    kept
}

pub fn dedupe(points: &[Point], tol: f64) -> Vec<Point> {
    dedupe_indices(points, tol).into_iter().map(|i| points[i]).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicPoint {
    pub z: Point,
    pub residual: f64,
    pub multiplicity: u32,
    /// Exact coordinates when the point is rational.
    pub exact: Option<[BigRational; 2]>,
}

/// The points of `Per_n`, sorted lexicographically.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSet {
    pub map: String,
    pub n: u32,
    pub points: Vec<PeriodicPoint>,
    pub expected_count: u64,
    pub escape_radius: f64,
    pub seed: Option<u64>,
}

impl PeriodicSet {
    pub fn found_count(&self) -> usize {
        self.points.len()
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.points.iter().map(|p| p.multiplicity as u64).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.total_multiplicity() == self.expected_count
    }

    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    pub fn coordinates(&self) -> Vec<Point> {
        self.points.iter().map(|p| p.z).collect()
    }

    pub fn rational_points(&self) -> Vec<[BigRational; 2]> {
        self.points.iter().filter_map(|p| p.exact.clone()).collect()
    }

    /// Whether some point lies within `tol` of `z`.
    pub fn contains(&self, z: Point, tol: f64) -> bool {
        self.points.iter().any(|p| dist(p.z, z) <= tol)
    }

    /// One line per point: `re_x im_x re_y im_y residual multiplicity exact`.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# map\t{}", self.map);
        let _ = writeln!(s, "# n\t{}", self.n);
        let _ = writeln!(s, "# found\t{}\texpected\t{}", self.found_count(), self.expected_count);
        let _ = writeln!(s, "# escape_radius\t{}", self.escape_radius);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed\t{seed}");
        }
        s.push_str("re_x\tim_x\tre_y\tim_y\tresidual\tmultiplicity\texact\n");
        for p in &self.points {
            let exact = match &p.exact {
                Some([x, y]) => format!("({x},{y})"),
                None => "-".into(),
            };
            let _ = writeln!(
                s,
                "{:.17e}\t{:.17e}\t{:.17e}\t{:.17e}\t{:.3e}\t{}\t{}",
                p.z[0].re, p.z[0].im, p.z[1].re, p.z[1].im, p.residual, p.multiplicity, exact
            );
        }
        s
    }
}

fn sort_points(points: &mut [PeriodicPoint]) {
    points.sort_by(|a, b| point_cmp(&a.z, &b.z));
}

/// Uniform probability measure on a finite set of points.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    pub support: Vec<Point>,
    pub weights: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn uniform(support: Vec<Point>) -> Result<Self, PeriodicError> {
        if support.is_empty() {
            return Err(PeriodicError::Empty);
        }
        let w = 1.0 / support.len() as f64;
        Ok(EmpiricalMeasure {
            weights: vec![w; support.len()],
            support,
        })
    }

    /// Uniform on the union of the sets, duplicates removed.
    pub fn union(sets: &[&PeriodicSet], tol: f64) -> Result<Self, PeriodicError> {
        let all: Vec<Point> = sets.iter().flat_map(|s| s.coordinates()).collect();
        EmpiricalMeasure::uniform(dedupe(&all, tol))
    }

    pub fn integrate(&self, phi: impl Fn(Point) -> f64) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| w * phi(*z))
            .sum()
    }

    /// Whether `f` maps the support onto itself up to `tol`.
    pub fn support_invariant(&self, f: &HenonMap, tol: f64) -> bool {
        let pushed: Vec<Point> = self.support.iter().map(|z| f.eval_complex(*z)).collect();
        let pushed = dedupe(&pushed, tol);
        pushed.len() == self.support.len()
            && pushed
                .iter()
                .all(|w| self.support.iter().any(|z| dist(*z, *w) <= tol))
    }
}

pub fn empirical_measure(ps: &PeriodicSet) -> Result<EmpiricalMeasure, PeriodicError> {
    EmpiricalMeasure::uniform(ps.coordinates())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TestFunction {
    One,
    ReX,
    AbsX2,
    ReY,
    AbsY2,
    ReXConjY,
    /// `exp(−(|x|² + |y|²)/8)`
    Bump0,
    /// `exp(−(|x − 2|² + |y − 2|²)/4)`
    Bump1,
}

impl TestFunction {
    pub const DEFAULT_SUITE: [TestFunction; 7] = [
        TestFunction::ReX,
        TestFunction::AbsX2,
        TestFunction::ReY,
        TestFunction::AbsY2,
        TestFunction::ReXConjY,
        TestFunction::Bump0,
        TestFunction::Bump1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::One => "one",
            TestFunction::ReX => "re_x",
            TestFunction::AbsX2 => "abs_x2",
            TestFunction::ReY => "re_y",
            TestFunction::AbsY2 => "abs_y2",
            TestFunction::ReXConjY => "re_x_conj_y",
            TestFunction::Bump0 => "bump0",
            TestFunction::Bump1 => "bump1",
        }
    }

    pub fn eval(&self, z: Point) -> f64 {
        let [x, y] = z;
        let two = Complex64::new(2.0, 0.0);
        match self {
            TestFunction::One => 1.0,
            TestFunction::ReX => x.re,
            TestFunction::AbsX2 => x.norm_sqr(),
            TestFunction::ReY => y.re,
            TestFunction::AbsY2 => y.norm_sqr(),
            TestFunction::ReXConjY => (x * y.conj()).re,
            TestFunction::Bump0 => (-(x.norm_sqr() + y.norm_sqr()) / 8.0).exp(),
            TestFunction::Bump1 => (-((x - two).norm_sqr() + (y - two).norm_sqr()) / 4.0).exp(),
        }
    }
}

impl std::str::FromStr for TestFunction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [TestFunction::One]
            .iter()
            .chain(TestFunction::DEFAULT_SUITE.iter())
            .find(|t| t.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown test function {s}"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub phi: TestFunction,
    pub n: u32,
    pub found: usize,
    pub expected: u64,
    pub complete: bool,
    pub average: f64,
    /// `|I_{next} − I_n|` for the next requested period.
    pub difference: Option<f64>,
    /// `|∫φ∘f dμ_n − ∫φ dμ_n|`
    pub invariance_defect: f64,
    pub support_invariant: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestFunctionReport {
    pub map: String,
    pub escape_radius: f64,
    pub seed: Option<u64>,
    pub dedupe_tol: f64,
    pub rows: Vec<ReportRow>,
}

impl TestFunctionReport {
    pub fn row(&self, phi: TestFunction, n: u32) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.phi == phi && r.n == n)
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# map\t{}", self.map);
        let _ = writeln!(s, "# escape_radius\t{}", self.escape_radius);
        match self.seed {
            Some(seed) => {
                let _ = writeln!(s, "# seed\t{seed}");
            }
            None => s.push_str("# seed\t-\n"),
        }
        let _ = writeln!(s, "# dedupe_tol\t{:e}", self.dedupe_tol);
        s.push_str("# the sequence Per_n is assumed generic; this is not certified\n");
        s.push_str("phi\tn\tfound\texpected\tcomplete\taverage\tdiff_next\tinvariance_defect\tsupport_invariant\n");
        for r in &self.rows {
            let diff = r.difference.map_or("-".to_string(), |d| format!("{d:.6e}"));
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{:.12e}\t{}\t{:.3e}\t{}",
                r.phi.name(),
                r.n,
                r.found,
                r.expected,
                r.complete,
                r.average,
                diff,
                r.invariance_defect,
                r.support_invariant
            );
        }
        s
    }
}

/// A report from already harvested sets, one per period in increasing order.
pub fn report_from_sets(
    f: &HenonMap,
    sets: &[PeriodicSet],
    suite: &[TestFunction],
    dedupe_tol: f64,
) -> Result<TestFunctionReport, PeriodicError> {
    let measures = sets.iter().map(empirical_measure).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for &phi in suite {
        let avgs: Vec<f64> = measures.iter().map(|m| m.integrate(|z| phi.eval(z))).collect();
        for (i, (set, mu)) in sets.iter().zip(&measures).enumerate() {
            let pushed = mu.integrate(|z| phi.eval(f.eval_complex(z)));
            rows.push(ReportRow {
                phi,
                n: set.n,
                found: set.found_count(),
                expected: set.expected_count,
                complete: set.is_complete(),
                average: avgs[i],
                difference: avgs.get(i + 1).map(|next| (next - avgs[i]).abs()),
                invariance_defect: (pushed - avgs[i]).abs(),
                support_invariant: mu.support_invariant(f, dedupe_tol),
            });
        }
    }
    Ok(TestFunctionReport {
        map: f.to_string(),
        escape_radius: f.escape_radius(),
        seed: sets.iter().find_map(|s| s.seed),
        dedupe_tol,
        rows,
    })
}

/// Harvest `Per_n` numerically for each `n` and tabulate the suite.
pub fn equidistribution_report(
    f: &HenonMap,
    n_list: &[u32],
    suite: &[TestFunction],
    opts: &NumericOptions,
) -> Result<TestFunctionReport, PeriodicError> {
    let sets = n_list
        .iter()
        .map(|&n| periodic_points_numeric(f, n, opts))
        .collect::<Result<Vec<_>, _>>()?;
    report_from_sets(f, &sets, suite, opts.dedupe_tol)
}
