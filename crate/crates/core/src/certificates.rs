//! Joint-regularity certificates, the composition divisor, region constants
//! and bad primes of a pair of maps.
//!
//! With `F = [X0^{d_f} : F1 : … : Fn]` and `G` the homogenized maps, a
//! certificate of degree `M` is a family of homogeneous polynomials with
//!
//! ```text
//! Σ_i P_ij F_i + Σ_i Q_ij G_i + X0 R_j = X_j^M      (j = 1..n)
//! ```
//!
//! Such an identity exists iff it exists modulo `X0`, i.e. iff `X_j^M` lies in
//! the ideal of the top-degree forms `F̄_i, Ḡ_i`. The search therefore solves
//! the smaller system for `P̄, Q̄` in the variables `X1..Xn` and recovers `R_j`
//! by exact division.

use crate::arith::{
    lcm_denominators, padic_abs, prime_factors, reduce_mod_p, ArithError,
};
use crate::linalg::{Eliminator, Fp, Scalar, SparseRow};
use crate::place::Place;
use crate::poly::{format_poly, homogeneous_vars, Exponents, HomogMap, MultiPoly, PolyError, PolyMap};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertificateError {
    #[error("no certificate with M <= {m_max}{}", if .witness.is_some() { " (common zero at infinity found)" } else { "" })]
    NotJointlyRegular {
        m_max: u32,
        /// A common zero `[0 : x1 : … : xn]` of all top-degree forms, which
        /// rules out a certificate at every `M`.
        witness: Option<Vec<BigRational>>,
    },
    #[error("linear system at M = {m_reached} has {unknowns} unknowns, cap is {cap}")]
    ResourceLimit {
        m_reached: u32,
        unknowns: usize,
        cap: usize,
    },
    #[error("the maps do not commute")]
    NotCommuting,
    #[error("component {component} is not divisible by X0^{l}")]
    NotDivisible { component: usize, l: u32 },
    #[error("coefficients are not {0}-integral")]
    NonIntegral(u64),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Largest certificate degree tried; `None` means `d_f·d_g + n`.
    pub m_max: Option<u32>,
    /// Largest number of unknowns in one linear system.
    pub unknown_cap: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            m_max: None,
            unknown_cap: 200_000,
        }
    }
}

impl SearchOptions {
    pub fn m_max_for(&self, f: &HomogMap, g: &HomogMap) -> u32 {
        self.m_max
            .unwrap_or(f.degree() * g.degree() + f.dim() as u32)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointCertificate {
    pub m: u32,
    /// `p[j][i]` is `P_ij`, homogeneous of degree `M − d_f` (or zero).
    pub p: Vec<Vec<MultiPoly>>,
    /// `q[j][i]` is `Q_ij`, homogeneous of degree `M − d_g` (or zero).
    pub q: Vec<Vec<MultiPoly>>,
    /// Homogeneous of degree `M − 1`.
    pub r: Vec<MultiPoly>,
}

impl JointCertificate {
    pub fn n(&self) -> usize {
        self.r.len()
    }

    /// `Σ_i P_ij F_i + Σ_i Q_ij G_i + X0 R_j` for target `j` (0-based).
    pub fn lhs(&self, f: &HomogMap, g: &HomogMap, j: usize) -> Result<MultiPoly, PolyError> {
        let n = self.n();
        let mut acc = MultiPoly::zero(n + 1);
        for i in 0..n {
            acc = acc.add(&self.p[j][i].mul(&f.affine_components()[i])?)?;
            acc = acc.add(&self.q[j][i].mul(&g.affine_components()[i])?)?;
        }
        acc.add(&self.r[j].mul(&MultiPoly::var(n + 1, 0))?)
    }

    /// Full expansion of every identity.
    pub fn verify(&self, f: &HomogMap, g: &HomogMap) -> bool {
        (0..self.n()).all(|j| {
            self.lhs(f, g, j)
                .map(|l| l == target_power(self.n(), j, self.m))
                .unwrap_or(false)
        })
    }

    /// Coefficients of `P`, `Q` and `R` for one target `j`.
    fn column_coefficients(&self, j: usize) -> impl Iterator<Item = &BigRational> {
        self.p[j]
            .iter()
            .chain(&self.q[j])
            .chain(std::iter::once(&self.r[j]))
            .flat_map(|c| c.coefficients())
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &BigRational> {
        (0..self.n()).flat_map(move |j| self.column_coefficients(j))
    }

    /// The integer `r_j` that clears the denominators of identity `j`.
    pub fn content(&self, j: usize, f: &HomogMap, g: &HomogMap) -> BigInt {
        let maps = f
            .affine_components()
            .iter()
            .chain(g.affine_components())
            .flat_map(|c| c.coefficients());
        lcm_denominators(self.column_coefficients(j).chain(maps))
    }

    /// Per target `j`: `Σ_i ‖P_ij‖₁ + Σ_i ‖Q_ij‖₁ + ‖R_j‖₁`.
    pub fn l1_sums(&self) -> Vec<BigRational> {
        (0..self.n())
            .map(|j| {
                self.p[j]
                    .iter()
                    .chain(&self.q[j])
                    .chain(std::iter::once(&self.r[j]))
                    .fold(BigRational::zero(), |acc, c| acc + c.l1_norm())
            })
            .collect()
    }
}

fn target_power(n: usize, j: usize, m: u32) -> MultiPoly {
    let mut e = vec![0; n + 1];
    e[j + 1] = m;
    MultiPoly::monomial(e, BigRational::one())
}

/// All exponent vectors of total degree `k` in `n + 1` variables with the
/// exponent of `X0` equal to zero, in descending lexicographic order.
pub fn monomials_at_infinity(n: usize, k: u32) -> Vec<Exponents> {
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Exponents>) {
        if pos == cur.len() - 1 {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[pos] = e;
            rec(pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut cur = vec![0; n + 1];
    rec(1, k, &mut cur, &mut out);
    out
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// The unknown layout of the system at degree `M`.
struct System {
    /// `(is_q, i, monomial)` per unknown column.
    columns: Vec<(bool, usize, Exponents)>,
    /// Equation rows keyed by the monomial whose coefficient they equate.
    rows: BTreeMap<Exponents, Vec<(usize, BigRational)>>,
}

fn count_unknowns(fbar: &[MultiPoly], gbar: &[MultiPoly], df: u32, dg: u32, m: u32) -> usize {
    let n = fbar.len() as u64;
    let block = |d: u32| binomial(m.saturating_sub(d) as u64 + n - 1, n - 1) as usize;
    fbar.iter().filter(|c| !c.is_zero()).count() * block(df)
        + gbar.iter().filter(|c| !c.is_zero()).count() * block(dg)
}

fn build_system(fbar: &[MultiPoly], gbar: &[MultiPoly], df: u32, dg: u32, m: u32) -> System {
    let n = fbar.len();
    let mut columns = Vec::new();
    let mut rows: BTreeMap<Exponents, Vec<(usize, BigRational)>> = BTreeMap::new();
    for (is_q, forms, d) in [(false, fbar, df), (true, gbar, dg)] {
        let mons = monomials_at_infinity(n, m - d);
        for (i, form) in forms.iter().enumerate() {
            if form.is_zero() {
                continue;
            }
            for mu in &mons {
                let col = columns.len();
                columns.push((is_q, i, mu.clone()));
                for (e, c) in form.terms() {
                    let nu: Exponents = e.iter().zip(mu).map(|(a, b)| a + b).collect();
                    rows.entry(nu).or_default().push((col, c.clone()));
                }
            }
        }
    }
    for j in 0..n {
        rows.entry(target_power(n, j, m).terms().next().unwrap().0.clone())
            .or_default();
    }
    System { columns, rows }
}

fn rhs_columns(n: usize, m: u32, nu: &Exponents) -> Option<usize> {
    (0..n).find(|&j| nu[j + 1] == m)
}

/// A common zero of all forms among the 0/1 points of the hyperplane at
/// infinity, for dimensions up to 12.
pub fn common_zero_at_infinity(fbar: &[MultiPoly], gbar: &[MultiPoly]) -> Option<Vec<BigRational>> {
    let n = fbar.len();
    if n == 0 || n > 12 {
        return None;
    }
    for mask in 1u32..(1 << n) {
        let mut pt = vec![BigRational::zero()];
        pt.extend((0..n).map(|i| {
            if mask >> (n - 1 - i) & 1 == 1 {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        }));
        let vanish = fbar
            .iter()
            .chain(gbar)
            .all(|c| c.eval(&pt).map(|v| v.is_zero()).unwrap_or(false));
        if vanish {
            return Some(pt);
        }
    }
    None
}

fn check_dims(f: &HomogMap, g: &HomogMap) -> Result<(), CertificateError> {
    if f.dim() != g.dim() {
        return Err(PolyError::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        }
        .into());
    }
    Ok(())
}

/// Ascending search for the smallest `M ≤ M_max` admitting a certificate.
pub fn find_certificate(
    f: &HomogMap,
    g: &HomogMap,
    opts: &SearchOptions,
) -> Result<JointCertificate, CertificateError> {
    check_dims(f, g)?;
    let n = f.dim();
    let (df, dg) = (f.degree(), g.degree());
    let fbar = f.at_infinity();
    let gbar = g.at_infinity();
    let m_max = opts.m_max_for(f, g);
    if let Some(w) = common_zero_at_infinity(&fbar, &gbar) {
        return Err(CertificateError::NotJointlyRegular {
            m_max,
            witness: Some(w),
        });
    }
    for m in df.max(dg)..=m_max {
        let unknowns = count_unknowns(&fbar, &gbar, df, dg, m);
        if unknowns > opts.unknown_cap {
            return Err(CertificateError::ResourceLimit {
                m_reached: m,
                unknowns,
                cap: opts.unknown_cap,
            });
        }
        let sys = build_system(&fbar, &gbar, df, dg, m);
        let mut elim = Eliminator::over_integers(sys.columns.len(), n);
        for (nu, row) in &sys.rows {
            let rhs = rhs_columns(n, m, nu);
            elim.push(integer_row(row, rhs.map(|j| sys.columns.len() + j)));
        }
        if !(0..n).all(|j| elim.consistent(j)) {
            continue;
        }
        let cert = assemble(f, g, &sys, m, |j| elim.solve(j).expect("consistent"))?;
        debug_assert!(cert.verify(f, g));
        return Ok(cert);
    }
    Err(CertificateError::NotJointlyRegular {
        m_max,
        witness: None,
    })
}

/// Scale a rational row (with an optional unit right-hand side) to integers.
fn integer_row(row: &[(usize, BigRational)], rhs_col: Option<usize>) -> SparseRow<BigInt> {
    let l = lcm_denominators(row.iter().map(|e| &e.1));
    let mut out: BTreeMap<usize, BigInt> = BTreeMap::new();
    for (c, v) in row {
        let x = (v * BigRational::from_integer(l.clone())).to_integer();
        *out.entry(*c).or_insert_with(BigInt::zero) += x;
    }
    if let Some(c) = rhs_col {
        out.insert(c, l);
    }
    out.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

fn assemble(
    f: &HomogMap,
    g: &HomogMap,
    sys: &System,
    m: u32,
    solve: impl Fn(usize) -> Vec<BigRational>,
) -> Result<JointCertificate, CertificateError> {
    let n = f.dim();
    let mut p = vec![vec![MultiPoly::zero(n + 1); n]; n];
    let mut q = vec![vec![MultiPoly::zero(n + 1); n]; n];
    let mut r = Vec::with_capacity(n);
    for j in 0..n {
        let x = solve(j);
        let mut pj: Vec<Vec<(Exponents, BigRational)>> = vec![Vec::new(); n];
        let mut qj: Vec<Vec<(Exponents, BigRational)>> = vec![Vec::new(); n];
        for ((is_q, i, mu), v) in sys.columns.iter().zip(x) {
            if v.is_zero() {
                continue;
            }
            if *is_q {
                qj[*i].push((mu.clone(), v));
            } else {
                pj[*i].push((mu.clone(), v));
            }
        }
        for i in 0..n {
            p[j][i] = MultiPoly::from_terms(n + 1, std::mem::take(&mut pj[i]))?;
            q[j][i] = MultiPoly::from_terms(n + 1, std::mem::take(&mut qj[i]))?;
        }
        let mut rest = target_power(n, j, m);
        for i in 0..n {
            rest = rest.sub(&p[j][i].mul(&f.affine_components()[i])?)?;
            rest = rest.sub(&q[j][i].mul(&g.affine_components()[i])?)?;
        }
        r.push(
            rest.divide_by_var_power(0, 1)
                .ok_or(CertificateError::NotDivisible { component: j + 1, l: 1 })?,
        );
    }
    Ok(JointCertificate { m, p, q, r })
}

fn reduce_form(c: &MultiPoly, p: u64) -> Result<Vec<(Exponents, u64)>, CertificateError> {
    c.terms()
        .map(|(e, v)| {
            reduce_mod_p(v, p)
                .map(|r| (e.clone(), r))
                .ok_or(CertificateError::NonIntegral(p))
        })
        .filter(|r| !matches!(r, Ok((_, 0))))
        .collect()
}

/// Smallest `M ≤ M_max` at which the reductions modulo `p` of the two maps
/// admit a certificate over `F_p`. Requires `p`-integral coefficients.
pub fn find_certificate_mod_p(
    f: &HomogMap,
    g: &HomogMap,
    p: u64,
    opts: &SearchOptions,
) -> Result<u32, CertificateError> {
    check_dims(f, g)?;
    let n = f.dim();
    let (df, dg) = (f.degree(), g.degree());
    let to_poly = |terms: Vec<(Exponents, u64)>| {
        MultiPoly::from_terms(
            n + 1,
            terms
                .into_iter()
                .map(|(e, v)| (e, BigRational::from_integer(v.into()))),
        )
    };
    let mut fbar = Vec::with_capacity(n);
    let mut gbar = Vec::with_capacity(n);
    for c in f.at_infinity() {
        fbar.push(to_poly(reduce_form(&c, p)?)?);
    }
    for c in g.at_infinity() {
        gbar.push(to_poly(reduce_form(&c, p)?)?);
    }
    let m_max = opts.m_max_for(f, g);
    for m in df.max(dg)..=m_max {
        let unknowns = count_unknowns(&fbar, &gbar, df, dg, m);
        if unknowns > opts.unknown_cap {
            return Err(CertificateError::ResourceLimit {
                m_reached: m,
                unknowns,
                cap: opts.unknown_cap,
            });
        }
        let sys = build_system(&fbar, &gbar, df, dg, m);
        let mut elim = Eliminator::over_fp(sys.columns.len(), n, p);
        for (nu, row) in &sys.rows {
            let mut r: SparseRow<Fp> = row
                .iter()
                .map(|(c, v)| (*c, Fp::new(reduce_mod_p(v, p).expect("reduced"), p)))
                .filter(|(_, v)| !v.vanishes())
                .collect();
            r.sort_by_key(|e| e.0);
            let mut merged: SparseRow<Fp> = Vec::new();
            for (c, v) in r {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => lv.value = (lv.value + v.value) % p,
                    _ => merged.push((c, v)),
                }
            }
            if let Some(j) = rhs_columns(n, m, nu) {
                merged.push((sys.columns.len() + j, Fp::new(1, p)));
            }
            elim.push(merged);
        }
        if (0..n).all(|j| elim.consistent(j)) {
            return Ok(m);
        }
    }
    Err(CertificateError::NotJointlyRegular {
        m_max,
        witness: None,
    })
}

/// The common factor `X0^l` of `F(g) = G(f)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositionDivisor {
    pub l: u32,
    pub d_j: u32,
    /// `J_0 = X0^{d_J}, J_1, …, J_n`.
    pub j: Vec<MultiPoly>,
}

pub fn extract_composition_divisor(
    f: &PolyMap,
    g: &PolyMap,
    term_cap: usize,
) -> Result<CompositionDivisor, CertificateError> {
    let fg = f.compose_capped(g, term_cap)?;
    let gf = g.compose_capped(f, term_cap)?;
    if fg != gf {
        return Err(CertificateError::NotCommuting);
    }
    let (hf, hg) = (f.homogenize(), g.homogenize());
    let d_prod = hf.degree() * hg.degree();
    let d_j = fg.degree();
    let l = d_prod - d_j;
    let a = hf.compose(&hg, term_cap)?;
    let b = hg.compose(&hf, term_cap)?;
    let mut j = Vec::with_capacity(a.len());
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        let jx = x
            .divide_by_var_power(0, l)
            .ok_or(CertificateError::NotDivisible { component: i, l })?;
        let jy = y
            .divide_by_var_power(0, l)
            .ok_or(CertificateError::NotDivisible { component: i, l })?;
        if jx != jy {
            return Err(CertificateError::NotCommuting);
        }
        j.push(jx);
    }
    Ok(CompositionDivisor { l, d_j, j })
}

impl CompositionDivisor {
    /// `F_i(g) = G_i(f) = X0^l J_i` for every `i`.
    pub fn verify(&self, f: &HomogMap, g: &HomogMap, term_cap: usize) -> bool {
        let x0l = {
            let mut e = vec![0; f.dim() + 1];
            e[0] = self.l;
            MultiPoly::monomial(e, BigRational::one())
        };
        let (Ok(a), Ok(b)) = (f.compose(g, term_cap), g.compose(f, term_cap)) else {
            return false;
        };
        self.j.iter().zip(a.iter().zip(&b)).all(|(ji, (x, y))| {
            let t = ji.mul(&x0l).expect("same arity");
            t == *x && t == *y
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateConstants {
    pub place: Place,
    /// Largest coefficient norm, at least 1.
    pub c0_raw: BigRational,
    /// The constant actually used, after inflation.
    pub c0: BigRational,
    pub epsilon: BigRational,
    pub delta: BigRational,
    /// At the archimedean place: the largest ℓ1 sum entering the triangle
    /// inequality, `max_j Σ(‖P_ij‖₁ + ‖Q_ij‖₁) + ‖R_j‖₁` and `max_i ‖J_i‖₁`.
    pub triangle: Option<BigRational>,
    pub d_f: u32,
    pub d_g: u32,
    pub d_j: u32,
    pub l: u32,
}

impl CertificateConstants {
    /// The named conditions and whether each holds, evaluated exactly.
    pub fn conditions(&self) -> Vec<(&'static str, bool)> {
        condition_table(
            &self.c0,
            self.triangle.as_ref(),
            &self.epsilon,
            &self.delta,
            self.d_f,
            self.d_g,
            self.d_j,
            self.l,
        )
    }

    pub fn all_hold(&self) -> bool {
        self.conditions().iter().all(|c| c.1)
    }

    /// The constant bounding coefficient sums in norm estimates.
    pub fn effective_c0(&self) -> BigRational {
        match &self.triangle {
            Some(t) if *t > self.c0 => t.clone(),
            _ => self.c0.clone(),
        }
    }
}

fn pow(q: &BigRational, k: u32) -> BigRational {
    q.pow(k as i32)
}

#[allow(clippy::too_many_arguments)]
fn condition_table(
    c0: &BigRational,
    triangle: Option<&BigRational>,
    eps: &BigRational,
    delta: &BigRational,
    df: u32,
    dg: u32,
    dj: u32,
    l: u32,
) -> Vec<(&'static str, bool)> {
    let one = BigRational::one();
    let d = df.min(dg);
    let k = match triangle {
        Some(t) if t > c0 => t.clone(),
        _ => c0.clone(),
    };
    vec![
        ("epsilon < 1/C0", eps * c0 < one),
        ("delta < 1/C0", delta * c0 < one),
        ("epsilon^(d-dJ) C0 < delta", pow(eps, d.saturating_sub(dj)) * c0 < *delta),
        ("epsilon^l C0 < delta^2", pow(eps, l) * c0 < pow(delta, 2)),
        (
            "epsilon^l K < delta^(1+dg)",
            pow(eps, l) * &k < pow(delta, 1 + dg),
        ),
        (
            "epsilon^l K < delta^(1+df)",
            pow(eps, l) * &k < pow(delta, 1 + df),
        ),
        ("K epsilon < 1", &k * eps < one),
        ("K delta < 1", &k * delta < one),
        (
            "epsilon^(d-dJ) K < delta",
            pow(eps, d.saturating_sub(dj)) * &k < *delta,
        ),
    ]
}

fn norm_at(c: &BigRational, place: Place) -> BigRational {
    match place {
        Place::Archimedean => c.abs(),
        Place::Finite(p) => padic_abs(c, p),
    }
}

/// `C0`, `ε = C0⁻⁴` and `δ = C0⁻²` at one place. A raw `C0` below 2 is
/// raised to 2; `C0` is then doubled until every condition holds.
pub fn constants_at_place(
    cert: &JointCertificate,
    cd: &CompositionDivisor,
    f: &HomogMap,
    g: &HomogMap,
    place: Place,
) -> CertificateConstants {
    let coeffs = f
        .affine_components()
        .iter()
        .chain(g.affine_components())
        .chain(&cd.j)
        .flat_map(|c| c.coefficients())
        .chain(cert.coefficients());
    let c0_raw = coeffs
        .map(|c| norm_at(c, place))
        .fold(BigRational::one(), |a, b| if b > a { b } else { a });
    let triangle = match place {
        Place::Archimedean => {
            let t = cert
                .l1_sums()
                .into_iter()
                .chain(cd.j.iter().map(|j| j.l1_norm()))
                .fold(BigRational::one(), |a, b| if b > a { b } else { a });
            Some(t)
        }
        Place::Finite(_) => None,
    };
    let two = BigRational::from_integer(2.into());
    let mut c0 = if c0_raw < two { two.clone() } else { c0_raw.clone() };
    let (df, dg) = (f.degree(), g.degree());
    loop {
        let epsilon = pow(&c0, 4).recip();
        let delta = pow(&c0, 2).recip();
        let ok = condition_table(&c0, triangle.as_ref(), &epsilon, &delta, df, dg, cd.d_j, cd.l)
            .iter()
            .all(|c| c.1);
        // Conditions that fail for every C0 (degenerate degrees) stop the
        // doubling after a bounded number of rounds.
        if ok || c0 > BigRational::from_integer(BigInt::from(1u64 << 62)) {
            return CertificateConstants {
                place,
                c0_raw,
                c0,
                epsilon,
                delta,
                triangle,
                d_f: df,
                d_g: dg,
                d_j: cd.d_j,
                l: cd.l,
            };
        }
        c0 = c0 * &two;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BadReason {
    NonIntegralCoefficient,
    DegreeDrop,
    CertificateContent,
}

impl fmt::Display for BadReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BadReason::NonIntegralCoefficient => "non-integral coefficient",
            BadReason::DegreeDrop => "degree drop under reduction",
            BadReason::CertificateContent => "certificate content not a unit",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BadPrimeSet {
    pub reasons: BTreeMap<u64, BTreeSet<BadReason>>,
}

impl BadPrimeSet {
    pub fn primes(&self) -> Vec<u64> {
        self.reasons.keys().copied().collect()
    }

    pub fn contains(&self, p: u64) -> bool {
        self.reasons.contains_key(&p)
    }

    pub fn is_empty(&self) -> bool {
        self.reasons.is_empty()
    }

    fn add(&mut self, n: &BigInt, why: BadReason) -> Result<(), ArithError> {
        for p in prime_factors(n)? {
            self.reasons.entry(p).or_default().insert(why);
        }
        Ok(())
    }
}

fn top_degree_content(f: &PolyMap) -> BigInt {
    let d = f.degree();
    f.components()
        .iter()
        .flat_map(|c| c.homogeneous_component(d).terms().map(|(_, v)| v.numer().clone()).collect::<Vec<_>>())
        .fold(BigInt::zero(), |a, b| a.gcd(&b))
}

/// Primes where the pair may fail to have good reduction.
pub fn bad_primes(
    f: &PolyMap,
    g: &PolyMap,
    cert: &JointCertificate,
    cd: &CompositionDivisor,
) -> Result<BadPrimeSet, ArithError> {
    let (hf, hg) = (f.homogenize(), g.homogenize());
    let mut set = BadPrimeSet::default();
    let all = hf
        .affine_components()
        .iter()
        .chain(hg.affine_components())
        .chain(&cd.j)
        .flat_map(|c| c.coefficients())
        .chain(cert.coefficients());
    set.add(&lcm_denominators(all), BadReason::NonIntegralCoefficient)?;
    for h in [f, g] {
        set.add(&top_degree_content(h), BadReason::DegreeDrop)?;
    }
    for j in 0..cert.n() {
        set.add(&cert.content(j, &hf, &hg), BadReason::CertificateContent)?;
    }
    Ok(set)
}

/// Certificate document in the map input syntax.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateExport {
    pub m: u32,
    pub vars: Vec<String>,
    pub p: Vec<Vec<String>>,
    pub q: Vec<Vec<String>>,
    pub r: Vec<String>,
    pub l: u32,
    pub d_j: u32,
    pub j: Vec<String>,
    pub constants: Vec<ConstantsExport>,
    pub bad_primes: Vec<BadPrimeExport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantsExport {
    pub place: String,
    pub c0_raw: String,
    pub c0: String,
    pub epsilon: String,
    pub delta: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triangle: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadPrimeExport {
    pub prime: u64,
    pub reasons: Vec<BadReason>,
}

fn q_str(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl CertificateExport {
    pub fn new(
        cert: &JointCertificate,
        cd: &CompositionDivisor,
        constants: &[CertificateConstants],
        bad: &BadPrimeSet,
    ) -> Self {
        let vars = homogeneous_vars(cert.n());
        let fmt_all = |row: &[MultiPoly]| row.iter().map(|c| format_poly(c, &vars)).collect();
        CertificateExport {
            m: cert.m,
            p: cert.p.iter().map(|r| fmt_all(r)).collect(),
            q: cert.q.iter().map(|r| fmt_all(r)).collect(),
            r: fmt_all(&cert.r),
            l: cd.l,
            d_j: cd.d_j,
            j: fmt_all(&cd.j),
            constants: constants
                .iter()
                .map(|c| ConstantsExport {
                    place: c.place.to_string(),
                    c0_raw: q_str(&c.c0_raw),
                    c0: q_str(&c.c0),
                    epsilon: q_str(&c.epsilon),
                    delta: q_str(&c.delta),
                    triangle: c.triangle.as_ref().map(q_str),
                })
                .collect(),
            bad_primes: bad
                .reasons
                .iter()
                .map(|(p, r)| BadPrimeExport {
                    prime: *p,
                    reasons: r.iter().copied().collect(),
                })
                .collect(),
            vars,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rational};
    use crate::poly::{default_vars, parse_poly, DEFAULT_TERM_CAP};
    use proptest::prelude::*;

    fn map(components: &[&str]) -> PolyMap {
        let vars = default_vars(components.len());
        PolyMap::new(components.iter().map(|c| parse_poly(c, &vars).unwrap()).collect()).unwrap()
    }

    fn henon() -> (PolyMap, PolyMap) {
        (map(&["x2", "x2^2 - x1"]), map(&["x1^2 - x2", "x1"]))
    }

    fn hpoly(s: &str, n: usize) -> MultiPoly {
        parse_poly(s, &homogeneous_vars(n)).unwrap()
    }

    #[test]
    fn henon_certificate_at_degree_two() {
        let (f, g) = henon();
        let (hf, hg) = (f.homogenize(), g.homogenize());
        let cert = find_certificate(&hf, &hg, &SearchOptions::default()).unwrap();
        assert_eq!(cert.m, 2);
        assert!(cert.verify(&hf, &hg));
        // X1^2 = G1 + X0 X2 and X2^2 = F2 + X0 X1.
        assert_eq!(cert.q[0][0], hpoly("1", 2));
        assert_eq!(cert.r[0], hpoly("X2", 2));
        assert_eq!(cert.p[1][1], hpoly("1", 2));
        assert_eq!(cert.r[1], hpoly("X1", 2));
    }

    #[test]
    fn identical_maps_are_not_jointly_regular() {
        let (f, _) = henon();
        let h = f.homogenize();
        match find_certificate(&h, &h, &SearchOptions::default()) {
            Err(CertificateError::NotJointlyRegular { witness: Some(w), .. }) => {
                assert_eq!(w, vec![int(0), int(1), int(0)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shared_zero_at_infinity() {
        // Both top-form pairs are X1^2 and X1 X2, which vanish at [0:0:1].
        let f = map(&["x1^2 + x2", "x1*x2"]);
        let g = map(&["x1^2", "x1*x2 + x1"]);
        let err = find_certificate(&f.homogenize(), &g.homogenize(), &SearchOptions::default())
            .unwrap_err();
        assert!(matches!(err, CertificateError::NotJointlyRegular { .. }));
    }

    #[test]
    fn resource_cap_is_reported() {
        let (f, g) = henon();
        let opts = SearchOptions {
            m_max: None,
            unknown_cap: 1,
        };
        let err = find_certificate(&f.homogenize(), &g.homogenize(), &opts).unwrap_err();
        assert!(matches!(err, CertificateError::ResourceLimit { m_reached: 2, .. }));
    }

    #[test]
    fn henon_composition_divisor() {
        let (f, g) = henon();
        let cd = extract_composition_divisor(&f, &g, DEFAULT_TERM_CAP).unwrap();
        assert_eq!(cd.l, 3);
        assert_eq!(cd.d_j, 1);
        assert_eq!(cd.j, vec![hpoly("X0", 2), hpoly("X1", 2), hpoly("X2", 2)]);
        assert!(cd.verify(&f.homogenize(), &g.homogenize(), DEFAULT_TERM_CAP));
    }

    #[test]
    fn henon_power_pair_divisor() {
        let (f, g) = henon();
        let f2 = f.iterate(2).unwrap();
        let g2 = g.iterate(2).unwrap();
        let cd = extract_composition_divisor(&f2, &g2, DEFAULT_TERM_CAP).unwrap();
        assert_eq!(cd.l, 15);
    }

    #[test]
    fn non_commuting_pair() {
        let (f, _) = henon();
        let g = map(&["x1^2 + x2", "x1"]);
        assert_eq!(
            extract_composition_divisor(&f, &g, DEFAULT_TERM_CAP),
            Err(CertificateError::NotCommuting)
        );
    }

    fn analyze(f: &PolyMap, g: &PolyMap) -> (JointCertificate, CompositionDivisor) {
        let cert = find_certificate(&f.homogenize(), &g.homogenize(), &SearchOptions::default())
            .unwrap();
        let cd = extract_composition_divisor(f, g, DEFAULT_TERM_CAP).unwrap();
        (cert, cd)
    }

    #[test]
    fn henon_constants() {
        let (f, g) = henon();
        let (cert, cd) = analyze(&f, &g);
        let (hf, hg) = (f.homogenize(), g.homogenize());
        let c = constants_at_place(&cert, &cd, &hf, &hg, Place::Archimedean);
        assert_eq!(c.c0_raw, int(1));
        assert_eq!(c.c0, int(2));
        assert_eq!(c.epsilon, rational(1, 16));
        assert_eq!(c.delta, rational(1, 4));
        assert!(c.all_hold());
        let c7 = constants_at_place(&cert, &cd, &hf, &hg, Place::Finite(7));
        assert_eq!((&c7.c0_raw, &c7.c0), (&int(1), &int(2)));
        assert!(c7.all_hold());
    }

    #[test]
    fn scaled_henon_constants_and_bad_primes() {
        let f = map(&["x2", "x2^2 - 6*x1"]);
        let g = map(&["1/6*x1^2 - 1/6*x2", "x1"]);
        assert!(f.compose(&g).unwrap().is_identity());
        let (cert, cd) = analyze(&f, &g);
        let (hf, hg) = (f.homogenize(), g.homogenize());
        let c = constants_at_place(&cert, &cd, &hf, &hg, Place::Archimedean);
        assert_eq!(c.c0, int(6));
        assert_eq!(c.epsilon, int(6).pow(4).recip());
        assert_eq!(c.delta, int(6).pow(2).recip());
        assert!(c.all_hold());
        let bad = bad_primes(&f, &g, &cert, &cd).unwrap();
        assert!(bad.contains(2) && bad.contains(3));
        assert!(bad.reasons[&3].contains(&BadReason::NonIntegralCoefficient));
    }

    #[test]
    fn henon_has_no_bad_primes() {
        let (f, g) = henon();
        let (cert, cd) = analyze(&f, &g);
        assert!(bad_primes(&f, &g, &cert, &cd).unwrap().is_empty());
    }

    #[test]
    fn non_integral_coefficient_is_bad() {
        let f = map(&["x2", "x2^2 - x1 + 1/3"]);
        let g = map(&["x1^2 - x2 + 1/3", "x1"]);
        assert!(f.compose(&g).unwrap().is_identity());
        let (cert, cd) = analyze(&f, &g);
        let bad = bad_primes(&f, &g, &cert, &cd).unwrap();
        assert_eq!(bad.primes(), vec![3]);
        assert!(bad.reasons[&3].contains(&BadReason::NonIntegralCoefficient));
    }

    #[test]
    fn degree_drop_is_bad() {
        let f = map(&["x2", "5*x2^2 - x1"]);
        let g = map(&["5*x1^2 - x2", "x1"]);
        let (cert, cd) = analyze(&f, &g);
        let bad = bad_primes(&f, &g, &cert, &cd).unwrap();
        assert!(bad.reasons[&5].contains(&BadReason::DegreeDrop));
    }

    #[test]
    fn mod_p_certificates_off_the_bad_set() {
        let (f, g) = henon();
        let (hf, hg) = (f.homogenize(), g.homogenize());
        for p in [2, 3, 5, 7, 11] {
            assert_eq!(find_certificate_mod_p(&hf, &hg, p, &SearchOptions::default()), Ok(2));
        }
        let f5 = map(&["x2", "5*x2^2 - x1"]);
        let g5 = map(&["5*x1^2 - x2", "x1"]);
        assert!(find_certificate_mod_p(
            &f5.homogenize(),
            &g5.homogenize(),
            5,
            &SearchOptions::default()
        )
        .is_err());
    }

    #[test]
    fn three_dimensional_pair() {
        let f = map(&["x2", "x3 + x2^2", "x1 + x3^2"]);
        let g = map(&["x3 - (x2 - x1^2)^2", "x1", "x2 - x1^2"]);
        assert!(f.compose(&g).unwrap().is_identity());
        let (hf, hg) = (f.homogenize(), g.homogenize());
        let cert = find_certificate(&hf, &hg, &SearchOptions::default()).unwrap();
        assert!(cert.verify(&hf, &hg));
        assert_eq!(cert.m, 4);
    }

    #[test]
    fn export_lists_everything() {
        let (f, g) = henon();
        let (cert, cd) = analyze(&f, &g);
        let (hf, hg) = (f.homogenize(), g.homogenize());
        let c = constants_at_place(&cert, &cd, &hf, &hg, Place::Archimedean);
        let bad = bad_primes(&f, &g, &cert, &cd).unwrap();
        let doc = CertificateExport::new(&cert, &cd, &[c], &bad).to_toml();
        assert!(doc.contains("m = 2"));
        assert!(doc.contains("epsilon = \"1/16\""));
        let back: CertificateExport = toml::from_str(&doc).unwrap();
        assert_eq!(back.l, 3);
    }

    fn arb_henon_pair() -> impl Strategy<Value = (PolyMap, PolyMap)> {
        // f = (y, a y^2 + b y + c - x) with inverse (a u^2 + b u + c - v, u).
        (1i64..5, 1i64..4, -3i64..4, 1i64..4, -3i64..4, 1i64..4).prop_map(|(a, ad, b, bd, c, cd)| {
            let (a, b, c) = (rational(a, ad), rational(b, bd), rational(c, cd));
            let n = 2;
            let x = MultiPoly::var(n, 0);
            let y = MultiPoly::var(n, 1);
            let q = |t: &MultiPoly| {
                t.mul(t).unwrap().scale(&a)
                    .add(&t.scale(&b)).unwrap()
                    .add(&MultiPoly::constant(n, c.clone())).unwrap()
            };
            let f = PolyMap::new(vec![y.clone(), q(&y).sub(&x).unwrap()]).unwrap();
            let g = PolyMap::new(vec![q(&x).sub(&y).unwrap(), x.clone()]).unwrap();
            (f, g)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn certificate_and_divisor_identities_hold((f, g) in arb_henon_pair()) {
            let (hf, hg) = (f.homogenize(), g.homogenize());
            let cert = find_certificate(&hf, &hg, &SearchOptions::default()).unwrap();
            prop_assert!(cert.verify(&hf, &hg));
            let cd = extract_composition_divisor(&f, &g, DEFAULT_TERM_CAP).unwrap();
            prop_assert!(cd.verify(&hf, &hg, DEFAULT_TERM_CAP));
            for place in [Place::Archimedean, Place::Finite(2), Place::Finite(3), Place::Finite(5)] {
                let c = constants_at_place(&cert, &cd, &hf, &hg, place);
                prop_assert!(c.all_hold(), "{:?}", c.conditions());
            }
            let bad = bad_primes(&f, &g, &cert, &cd).unwrap();
            let mut checked = 0;
            for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23] {
                if checked == 5 { break; }
                if bad.contains(p) { continue; }
                prop_assert!(find_certificate_mod_p(&hf, &hg, p, &SearchOptions::default()).is_ok());
                checked += 1;
            }
        }

        #[test]
        fn bad_set_grows_with_denominators((f, g) in arb_henon_pair(), k in 0usize..4) {
            let q = [7i64, 11, 13, 17][k];
            let (cert, cd) = analyze(&f, &g);
            let before = bad_primes(&f, &g, &cert, &cd).unwrap();
            // Add the same constant 1/q to both maps: (y, φ(y) + 1/q - x).
            let shift = MultiPoly::constant(2, rational(1, q));
            let f2 = PolyMap::new(vec![
                f.components()[0].clone(),
                f.components()[1].add(&shift).unwrap(),
            ]).unwrap();
            let g2 = PolyMap::new(vec![
                g.components()[0].add(&shift).unwrap(),
                g.components()[1].clone(),
            ]).unwrap();
            prop_assume!(f2.compose(&g2).unwrap().is_identity());
            let (cert2, cd2) = analyze(&f2, &g2);
            let after = bad_primes(&f2, &g2, &cert2, &cd2).unwrap();
            prop_assert!(after.contains(q as u64));
            for p in before.primes() {
                prop_assert!(after.contains(p));
            }
        }
    }
}
