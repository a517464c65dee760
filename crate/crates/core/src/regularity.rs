//! Strong-regularity checks for a pair of maps and the equal-degree power
//! pair of a regular automorphism.

use crate::certificates::{find_certificate, CertificateError, JointCertificate, SearchOptions};
use crate::poly::{degree_sequence, PolyError, PolyMap, DEFAULT_TERM_CAP};
use num_bigint::BigUint;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegularityError {
    #[error("no positive integers l1 + l2 = {n} with {d_plus}^l2 = {d_minus}^l1")]
    NoIntegerSolution { n: usize, d_plus: u32, d_minus: u32 },
    #[error("degrees must be at least 2, got {0} and {1}")]
    DegreeTooSmall(u32, u32),
    #[error("the second map is not the inverse of the first")]
    NotInverse,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegularityOptions {
    /// Algebraic stability is checked for `m ≤ m_max`.
    pub m_max: u32,
    pub search: SearchOptions,
    pub term_cap: usize,
}

impl Default for RegularityOptions {
    fn default() -> Self {
        RegularityOptions {
            m_max: 3,
            search: SearchOptions::default(),
            term_cap: DEFAULT_TERM_CAP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    JointRegularity,
    Commutation,
    DegreeAtLeastTwo,
    AlgebraicStability,
    DegreeDrop,
    CFiniteness,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::JointRegularity => "joint regularity",
            Condition::Commutation => "commutation",
            Condition::DegreeAtLeastTwo => "degrees at least 2",
            Condition::AlgebraicStability => "algebraic stability",
            Condition::DegreeDrop => "degree drop",
            Condition::CFiniteness => "c-finiteness",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Not decided, e.g. because a resource cap was hit.
    Undetermined(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JointVerdict {
    Certified(JointCertificate),
    /// No certificate up to `m_max`. With a witness this is a disproof.
    NotFound {
        m_max: u32,
        proved: bool,
    },
    Resource(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CTag {
    AutomorphismDerived,
    Assumed,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    StronglyRegular,
    Failed(Vec<Condition>),
    /// Nothing failed but some conditions could not be decided.
    Incomplete(Vec<Condition>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionEntry {
    pub condition: Condition,
    pub status: Status,
    pub evidence: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularityReport {
    pub jointly_regular: JointVerdict,
    pub commutes: Option<bool>,
    pub degrees: (u32, u32),
    pub degrees_ge_2: bool,
    pub stable_up_to: u32,
    pub m_max: u32,
    pub degree_sequences: (Vec<u32>, Vec<u32>),
    pub composite_degree: Option<u32>,
    pub degree_drop: Option<bool>,
    pub c_finiteness: CTag,
    pub entries: Vec<ConditionEntry>,
    pub warnings: Vec<String>,
    pub verdict: Verdict,
}

impl RegularityReport {
    pub fn is_strongly_regular(&self) -> bool {
        self.verdict == Verdict::StronglyRegular
    }

    pub fn certificate(&self) -> Option<&JointCertificate> {
        match &self.jointly_regular {
            JointVerdict::Certified(c) => Some(c),
            _ => None,
        }
    }

    pub fn to_toml(&self) -> String {
        #[derive(Serialize)]
        struct Entry<'a> {
            condition: Condition,
            status: String,
            evidence: &'a str,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            verdict: String,
            degrees: [u32; 2],
            m_max: u32,
            stable_up_to: u32,
            c_finiteness: CTag,
            warnings: &'a [String],
            conditions: Vec<Entry<'a>>,
        }
        let doc = Doc {
            verdict: self.verdict.to_string(),
            degrees: [self.degrees.0, self.degrees.1],
            m_max: self.m_max,
            stable_up_to: self.stable_up_to,
            c_finiteness: self.c_finiteness,
            warnings: &self.warnings,
            conditions: self
                .entries
                .iter()
                .map(|e| Entry {
                    condition: e.condition,
                    status: match &e.status {
                        Status::Pass => "pass".into(),
                        Status::Fail => "fail".into(),
                        Status::Undetermined(why) => format!("undetermined: {why}"),
                    },
                    evidence: &e.evidence,
                })
                .collect(),
        };
        toml::to_string(&doc).expect("plain data serializes")
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[Condition]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ");
        match self {
            Verdict::StronglyRegular => write!(f, "strongly-regular"),
            Verdict::Failed(v) => write!(f, "failed({})", list(v)),
            Verdict::Incomplete(v) => write!(f, "incomplete({})", list(v)),
        }
    }
}

/// How much is known about the pair beyond the maps themselves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairOrigin {
    /// Nothing; the c-finiteness condition is assumed.
    General,
    /// Both members are iterates of one verified automorphism and its inverse.
    AutomorphismIterates,
}

fn is_inverse(f: &PolyMap, g: &PolyMap, cap: usize) -> Result<bool, PolyError> {
    Ok(f.compose_capped(g, cap)?.is_identity() && g.compose_capped(f, cap)?.is_identity())
}

pub fn check_strongly_regular(
    f: &PolyMap,
    g: &PolyMap,
    opts: &RegularityOptions,
) -> Result<RegularityReport, RegularityError> {
    check_with_origin(f, g, opts, PairOrigin::General)
}

pub fn check_with_origin(
    f: &PolyMap,
    g: &PolyMap,
    opts: &RegularityOptions,
    origin: PairOrigin,
) -> Result<RegularityReport, RegularityError> {
    if f.dim() != g.dim() {
        return Err(PolyError::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        }
        .into());
    }
    let cap = opts.term_cap;
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    let (df, dg) = (f.degree(), g.degree());

    let (hf, hg) = (f.homogenize(), g.homogenize());
    let jointly_regular = match find_certificate(&hf, &hg, &opts.search) {
        Ok(c) => {
            entries.push(ConditionEntry {
                condition: Condition::JointRegularity,
                status: Status::Pass,
                evidence: format!("certificate at M = {}, identities verified by expansion", c.m),
            });
            JointVerdict::Certified(c)
        }
        Err(CertificateError::NotJointlyRegular { m_max, witness }) => {
            let proved = witness.is_some();
            let evidence = match &witness {
                Some(w) => format!(
                    "common zero of the top-degree forms at infinity: [{}]",
                    w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" : ")
                ),
                None => format!("no certificate with M <= {m_max} (bounded search, not a disproof)"),
            };
            entries.push(ConditionEntry {
                condition: Condition::JointRegularity,
                status: Status::Fail,
                evidence,
            });
            JointVerdict::NotFound { m_max, proved }
        }
        Err(e) => {
            entries.push(ConditionEntry {
                condition: Condition::JointRegularity,
                status: Status::Undetermined(e.to_string()),
                evidence: String::new(),
            });
            JointVerdict::Resource(e.to_string())
        }
    };

    let fg = f.compose_capped(g, cap);
    let gf = g.compose_capped(f, cap);
    let (commutes, composite_degree) = match (&fg, &gf) {
        (Ok(a), Ok(b)) => (Some(a == b), Some(a.degree())),
        _ => (None, None),
    };
    entries.push(match commutes {
        Some(c) => ConditionEntry {
            condition: Condition::Commutation,
            status: if c { Status::Pass } else { Status::Fail },
            evidence: if c {
                "f∘g = g∘f symbolically".into()
            } else {
                "f∘g ≠ g∘f".into()
            },
        },
        None => ConditionEntry {
            condition: Condition::Commutation,
            status: Status::Undetermined("term cap reached while composing".into()),
            evidence: String::new(),
        },
    });

    let degrees_ge_2 = df >= 2 && dg >= 2;
    entries.push(ConditionEntry {
        condition: Condition::DegreeAtLeastTwo,
        status: if degrees_ge_2 { Status::Pass } else { Status::Fail },
        evidence: format!("deg f = {df}, deg g = {dg}"),
    });

    let sf = degree_sequence(f, opts.m_max, cap);
    let sg = degree_sequence(g, opts.m_max, cap);
    let stable_prefix = |s: &[u32], d: u32| {
        s.iter()
            .enumerate()
            .take_while(|(k, &deg)| BigUint::from(d).pow(*k as u32 + 1) == BigUint::from(deg))
            .count() as u32
    };
    let stable_up_to = stable_prefix(&sf.degrees, df).min(stable_prefix(&sg.degrees, dg));
    let truncated = sf.truncated.is_some() || sg.truncated.is_some();
    let stability_status = if stable_up_to >= opts.m_max {
        Status::Pass
    } else if (stable_up_to as usize) < sf.degrees.len().min(sg.degrees.len()) {
        Status::Fail
    } else if truncated {
        Status::Undetermined(format!("term cap reached after m = {stable_up_to}"))
    } else {
        Status::Fail
    };
    entries.push(ConditionEntry {
        condition: Condition::AlgebraicStability,
        status: stability_status,
        evidence: format!(
            "deg f^m = {:?}, deg g^m = {:?} for m = 1..{}",
            sf.degrees, sg.degrees, opts.m_max
        ),
    });

    let degree_drop = composite_degree.map(|d| d < df.min(dg));
    entries.push(match (degree_drop, composite_degree) {
        (Some(drop), Some(d)) => ConditionEntry {
            condition: Condition::DegreeDrop,
            status: if drop { Status::Pass } else { Status::Fail },
            evidence: format!("deg(f∘g) = {d}, min(deg f, deg g) = {}", df.min(dg)),
        },
        _ => ConditionEntry {
            condition: Condition::DegreeDrop,
            status: Status::Undetermined("composition not available".into()),
            evidence: String::new(),
        },
    });

    let c_finiteness = match origin {
        PairOrigin::AutomorphismIterates => CTag::AutomorphismDerived,
        PairOrigin::General => match is_inverse(f, g, cap) {
            Ok(true) => CTag::AutomorphismDerived,
            Ok(false) => {
                warnings.push(
                    "c-finiteness is assumed: g is not verified to be the inverse of f".into(),
                );
                CTag::Assumed
            }
            Err(_) => {
                warnings.push("c-finiteness unknown: inverse check hit the term cap".into());
                CTag::Unknown
            }
        },
    };
    entries.push(ConditionEntry {
        condition: Condition::CFiniteness,
        status: match c_finiteness {
            CTag::Unknown => Status::Undetermined("inverse check incomplete".into()),
            _ => Status::Pass,
        },
        evidence: match c_finiteness {
            CTag::AutomorphismDerived => "r(f) = deg f · deg f⁻¹ for a regular automorphism".into(),
            CTag::Assumed => "assumed".into(),
            CTag::Unknown => String::new(),
        },
    });

    let failed: Vec<_> = entries
        .iter()
        .filter(|e| e.status == Status::Fail)
        .map(|e| e.condition)
        .collect();
    let open: Vec<_> = entries
        .iter()
        .filter(|e| matches!(e.status, Status::Undetermined(_)))
        .map(|e| e.condition)
        .collect();
    let verdict = if !failed.is_empty() {
        Verdict::Failed(failed)
    } else if !open.is_empty() {
        Verdict::Incomplete(open)
    } else {
        Verdict::StronglyRegular
    };

    Ok(RegularityReport {
        jointly_regular,
        commutes,
        degrees: (df, dg),
        degrees_ge_2,
        stable_up_to,
        m_max: opts.m_max,
        degree_sequences: (sf.degrees, sg.degrees),
        composite_degree,
        degree_drop,
        c_finiteness,
        entries,
        warnings,
        verdict,
    })
}

/// The positive integers with `l1 + l2 = n` and `d_plus^l2 = d_minus^l1`.
pub fn solve_power_exponents(
    n: usize,
    d_plus: u32,
    d_minus: u32,
) -> Result<(u32, u32), RegularityError> {
    if d_plus < 2 || d_minus < 2 {
        return Err(RegularityError::DegreeTooSmall(d_plus, d_minus));
    }
    let sols: Vec<(u32, u32)> = (1..n as u32)
        .map(|l1| (l1, n as u32 - l1))
        .filter(|&(l1, l2)| BigUint::from(d_plus).pow(l2) == BigUint::from(d_minus).pow(l1))
        .collect();
    debug_assert!(sols.len() <= 1, "solutions are unique: {sols:?}");
    sols.first().copied().ok_or(RegularityError::NoIntegerSolution {
        n,
        d_plus,
        d_minus,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutomorphismPair {
    pub f: PolyMap,
    pub f_inv: PolyMap,
    pub l1: u32,
    pub l2: u32,
    /// `(f^{l2}, f^{-l1})`.
    pub s: (PolyMap, PolyMap),
    /// `deg f · deg f⁻¹`.
    pub r_bound: u32,
    pub report: RegularityReport,
}

pub fn power_pair(
    f: &PolyMap,
    f_inv: &PolyMap,
    opts: &RegularityOptions,
) -> Result<AutomorphismPair, RegularityError> {
    if f.dim() != f_inv.dim() || !is_inverse(f, f_inv, opts.term_cap)? {
        return Err(RegularityError::NotInverse);
    }
    let (l1, l2) = solve_power_exponents(f.dim(), f.degree(), f_inv.degree())?;
    let s = (
        f.iterate_capped(l2, opts.term_cap)?,
        f_inv.iterate_capped(l1, opts.term_cap)?,
    );
    let report = check_with_origin(&s.0, &s.1, opts, PairOrigin::AutomorphismIterates)?;
    Ok(AutomorphismPair {
        f: f.clone(),
        f_inv: f_inv.clone(),
        l1,
        l2,
        r_bound: f.degree() * f_inv.degree(),
        s,
        report,
    })
}
