//! Sparse exact row elimination with several right-hand sides.
//!
//! Rows are inserted one at a time and reduced against the pivots found so
//! far. Over the integers the elimination is fraction free: the target row
//! becomes `a·target − b·pivot` and is then divided by its content. Over
//! `F_p` pivots are scaled to one.

use crate::arith::{inv_mod, mulmod};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt::Debug;

/// Sparse row: `(column, value)` pairs sorted by column, no zeros.
pub type SparseRow<T> = Vec<(usize, T)>;

pub trait Scalar: Clone + Debug + PartialEq {
    type Field: Clone + Debug + PartialEq;
    fn vanishes(&self) -> bool;
    /// Cancel the entry of `target` at `pivot`'s leading column.
    fn eliminate(target: &SparseRow<Self>, pivot: &SparseRow<Self>) -> SparseRow<Self>;
    /// Bring a freshly inserted pivot row to normal form.
    fn normalize(row: &mut SparseRow<Self>);
    fn lift(&self) -> Self::Field;
    /// `acc − a·x`.
    fn sub_mul(acc: &Self::Field, a: &Self, x: &Self::Field) -> Self::Field;
    fn div(acc: &Self::Field, a: &Self) -> Self::Field;
}

fn merge<T: Clone>(
    a: &SparseRow<T>,
    b: &SparseRow<T>,
    mut combine: impl FnMut(Option<&T>, Option<&T>) -> Option<T>,
) -> SparseRow<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (col, va, vb) = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x.0 == y.0 => {
                i += 1;
                j += 1;
                (x.0, Some(&x.1), Some(&y.1))
            }
            (Some(x), Some(y)) if x.0 < y.0 => {
                i += 1;
                (x.0, Some(&x.1), None)
            }
            (Some(x), None) => {
                i += 1;
                (x.0, Some(&x.1), None)
            }
            (_, Some(y)) => {
                j += 1;
                (y.0, None, Some(&y.1))
            }
            (None, None) => unreachable!(),
        };
        if let Some(v) = combine(va, vb) {
            out.push((col, v));
        }
    }
    out
}

fn entry<T>(row: &SparseRow<T>, col: usize) -> Option<&T> {
    row.binary_search_by_key(&col, |e| e.0).ok().map(|k| &row[k].1)
}

impl Scalar for BigInt {
    type Field = BigRational;

    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }

    fn eliminate(target: &SparseRow<Self>, pivot: &SparseRow<Self>) -> SparseRow<Self> {
        let (col, a) = &pivot[0];
        let b = entry(target, *col).expect("target has an entry at the pivot column");
        let g = a.gcd(b);
        let (a, b) = (a / &g, b / &g);
        let mut row = merge(target, pivot, |t, p| {
            let v = match (t, p) {
                (Some(t), Some(p)) => &a * t - &b * p,
                (Some(t), None) => &a * t,
                (None, Some(p)) => -(&b * p),
                (None, None) => unreachable!(),
            };
            (!Zero::is_zero(&v)).then_some(v)
        });
        remove_content(&mut row);
        row
    }

    fn normalize(row: &mut SparseRow<Self>) {
        remove_content(row);
        if row[0].1.is_negative() {
            for e in row.iter_mut() {
                e.1 = -&e.1;
            }
        }
    }

    fn lift(&self) -> BigRational {
        BigRational::from_integer(self.clone())
    }

    fn sub_mul(acc: &BigRational, a: &Self, x: &BigRational) -> BigRational {
        acc - x * a
    }

    fn div(acc: &BigRational, a: &Self) -> BigRational {
        acc / a
    }
}

fn remove_content(row: &mut SparseRow<BigInt>) {
    let g = row.iter().fold(BigInt::zero(), |g, e| g.gcd(&e.1));
    if !Zero::is_zero(&g) && !g.is_one() {
        for e in row.iter_mut() {
            e.1 = &e.1 / &g;
        }
    }
}

/// An element of `F_p` carrying its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fp {
    pub value: u64,
    pub p: u64,
}

impl Fp {
    pub fn new(value: u64, p: u64) -> Self {
        Fp { value: value % p, p }
    }
}

impl std::ops::Add for Fp {
    type Output = Fp;
    fn add(self, o: Fp) -> Fp {
        Fp::new(((self.value as u128 + o.value as u128) % self.p as u128) as u64, self.p)
    }
}

impl std::ops::Mul for Fp {
    type Output = Fp;
    fn mul(self, o: Fp) -> Fp {
        Fp::new(mulmod(self.value, o.value, self.p), self.p)
    }
}

impl Scalar for Fp {
    type Field = Fp;

    fn vanishes(&self) -> bool {
        self.value == 0
    }

    fn eliminate(target: &SparseRow<Self>, pivot: &SparseRow<Self>) -> SparseRow<Self> {
        // Pivot rows are normalized to a leading one.
        let col = pivot[0].0;
        let p = pivot[0].1.p;
        let b = entry(target, col).expect("target has an entry at the pivot column").value;
        merge(target, pivot, |t, q| {
            let t = t.map(|x| x.value).unwrap_or(0);
            let q = q.map(|x| x.value).unwrap_or(0);
            let v = (t + p - mulmod(b, q, p)) % p;
            (v != 0).then_some(Fp { value: v, p })
        })
    }

    fn normalize(row: &mut SparseRow<Self>) {
        let p = row[0].1.p;
        let inv = inv_mod(row[0].1.value, p).expect("nonzero mod p");
        for e in row.iter_mut() {
            e.1.value = mulmod(e.1.value, inv, p);
        }
    }

    fn lift(&self) -> Fp {
        *self
    }

    fn sub_mul(acc: &Fp, a: &Self, x: &Fp) -> Fp {
        let p = acc.p;
        Fp {
            value: (acc.value + p - mulmod(a.value, x.value, p)) % p,
            p,
        }
    }

    fn div(acc: &Fp, a: &Self) -> Fp {
        let inv = inv_mod(a.value, a.p).expect("nonzero pivot");
        Fp {
            value: mulmod(acc.value, inv, a.p),
            p: a.p,
        }
    }
}

/// A linear system `A x = b_j` for `j = 0..k`, all sharing `A`.
///
/// Columns `0..unknowns` belong to `A`, columns `unknowns..unknowns + k`
/// to the right-hand sides.
#[derive(Clone, Debug)]
pub struct Eliminator<T: Scalar> {
    unknowns: usize,
    rhs: usize,
    /// Pivot rows in insertion order; `pivot_of[c]` indexes into it.
    pivots: Vec<SparseRow<T>>,
    pivot_of: Vec<Option<usize>>,
    /// Reduced rows with no entry among the unknowns.
    constraints: Vec<SparseRow<T>>,
    zero: T::Field,
}

impl Eliminator<BigInt> {
    pub fn over_integers(unknowns: usize, rhs: usize) -> Self {
        Self::new(unknowns, rhs, BigRational::zero())
    }
}

impl Eliminator<Fp> {
    pub fn over_fp(unknowns: usize, rhs: usize, p: u64) -> Self {
        Self::new(unknowns, rhs, Fp { value: 0, p })
    }
}

impl<T: Scalar> Eliminator<T> {
    pub fn new(unknowns: usize, rhs: usize, zero: T::Field) -> Self {
        Eliminator {
            unknowns,
            rhs,
            pivots: Vec::new(),
            pivot_of: vec![None; unknowns],
            constraints: Vec::new(),
            zero,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Insert one equation. `row` may be unsorted; zero entries are dropped.
    pub fn push(&mut self, mut row: SparseRow<T>) {
        row.retain(|e| !e.1.vanishes());
        row.sort_by_key(|e| e.0);
        debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(row.iter().all(|e| e.0 < self.unknowns + self.rhs));
        loop {
            match row.first() {
                None => return,
                Some((c, _)) if *c >= self.unknowns => {
                    self.constraints.push(row);
                    return;
                }
                Some((c, _)) => match self.pivot_of[*c] {
                    Some(k) => row = T::eliminate(&row, &self.pivots[k]),
                    None => {
                        let c = *c;
                        T::normalize(&mut row);
                        self.pivot_of[c] = Some(self.pivots.len());
                        self.pivots.push(row);
                        return;
                    }
                },
            }
        }
    }

    /// Whether right-hand side `j` is in the column span of `A`.
    pub fn consistent(&self, j: usize) -> bool {
        let col = self.unknowns + j;
        self.constraints.iter().all(|r| entry(r, col).is_none())
    }

    /// A solution for right-hand side `j` with all free unknowns zero.
    pub fn solve(&self, j: usize) -> Option<Vec<T::Field>> {
        if !self.consistent(j) {
            return None;
        }
        let zero = &self.zero;
        let col = self.unknowns + j;
        let mut x = vec![zero.clone(); self.unknowns];
        for c in (0..self.unknowns).rev() {
            let Some(k) = self.pivot_of[c] else { continue };
            let row = &self.pivots[k];
            let mut acc = entry(row, col).map(|v| v.lift()).unwrap_or_else(|| zero.clone());
            for (cc, v) in row.iter().skip(1) {
                if *cc >= self.unknowns {
                    break;
                }
                acc = T::sub_mul(&acc, v, &x[*cc]);
            }
            x[c] = T::div(&acc, &row[0].1);
        }
        Some(x)
    }
}
