use crate::config::{PlaceSelector, RunConfig};
use crate::error::CliError;
use crate::points::format_point;
use num_rational::BigRational;
use rayon::prelude::*;
use srpair_core::certificates::SearchOptions;
use srpair_core::green::{green_eval, green_pair, AnalyzedPair, GreenOptions, GreenValue, Member};
use srpair_core::heights::{canonical_height_forward, canonical_height_pair, naive_height, HeightValue};
use srpair_core::periodic::{
    equidistribution_report, fixed_points_exact, periodic_points_numeric, ExactOptions,
    HenonMap, NumericOptions, PeriodicSet, TestFunction,
};
use srpair_core::poly::{MapDocument, PairDocument, PairInput};
use srpair_core::regularity::{
    check_with_origin, power_pair, PairOrigin, RegularityError, RegularityOptions,
    RegularityReport,
};
use srpair_core::{Place, PolyMap};
use std::fmt::Write;

/// Rendered output and the exit code that goes with it.
pub struct Output {
    pub text: String,
    pub code: i32,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, code: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum MemberSel {
    F,
    G,
    /// `max(G_f, G_g)`.
    Pair,
}

fn read_input(cfg: &RunConfig) -> Result<String, CliError> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| CliError::Input("no input file given".into()))?;
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn pair_input(cfg: &RunConfig) -> Result<PairInput, CliError> {
    Ok(PairDocument::parse(&read_input(cfg)?)?.to_input()?)
}

fn regularity_options(cfg: &RunConfig) -> RegularityOptions {
    RegularityOptions {
        m_max: cfg.m_max,
        search: search_options(cfg),
        ..Default::default()
    }
}

fn search_options(cfg: &RunConfig) -> SearchOptions {
    SearchOptions {
        m_max: cfg.mmax,
        ..Default::default()
    }
}

/// The regularity report for the input and the TOML lines describing how
/// the checked pair was formed.
fn checked_pair(cfg: &RunConfig) -> Result<(RegularityReport, String, PairInput), CliError> {
    let input = pair_input(cfg)?;
    let opts = regularity_options(cfg);
    let mut head = String::new();
    let report = match &input {
        PairInput::Pair { f, g, .. } => {
            head.push_str("input = \"pair\"\n");
            check_with_origin(f, g, &opts, PairOrigin::General)?
        }
        PairInput::Automorphism { f, f_inv, .. } => {
            head.push_str("input = \"automorphism\"\n");
            match power_pair(f, f_inv, &opts) {
                Ok(ap) => {
                    let _ = writeln!(head, "exponents = [{}, {}]", ap.l1, ap.l2);
                    ap.report
                }
                Err(e @ RegularityError::NoIntegerSolution { .. }) => {
                    let _ = writeln!(head, "note = \"{e}; checked the map with its inverse\"");
                    check_with_origin(f, f_inv, &opts, PairOrigin::AutomorphismIterates)?
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    Ok((report, head, input))
}

pub fn cmd_check(cfg: &RunConfig) -> Result<Output, CliError> {
    let (report, head, _) = checked_pair(cfg)?;
    let text = format!("seed = {}\n{head}{}", cfg.seed, report.to_toml());
    let code = if report.is_strongly_regular() { 0 } else { 1 };
    Ok(Output { text, code })
}

fn analyzed_pair(cfg: &RunConfig, input: &PairInput) -> Result<AnalyzedPair, CliError> {
    let search = search_options(cfg);
    match input {
        PairInput::Pair { f, g, .. } => Ok(AnalyzedPair::new(f, g, &search)?),
        PairInput::Automorphism { f, f_inv, .. } => {
            match power_pair(f, f_inv, &regularity_options(cfg)) {
                Ok(ap) => Ok(AnalyzedPair::from_automorphism(&ap, &search)?),
                Err(RegularityError::NoIntegerSolution { .. }) => Ok(AnalyzedPair::new(f, f_inv, &search)?
                    .with_inverse(Member::First, f_inv.clone())?
                    .with_inverse(Member::Second, f.clone())?),
                Err(e) => Err(e.into()),
            }
        }
    }
}

pub fn cmd_certificate(cfg: &RunConfig, force: bool) -> Result<Output, CliError> {
    let input = if force {
        pair_input(cfg)?
    } else {
        let (report, _, input) = checked_pair(cfg)?;
        if !report.is_strongly_regular() {
            return Err(CliError::Negative(format!(
                "pair is {}; use --force to compute a certificate anyway",
                report.verdict
            )));
        }
        input
    };
    let pair = analyzed_pair(cfg, &input)?;
    let mut constants = vec![pair.constants(Place::Archimedean)];
    constants.extend(pair.bad.primes().into_iter().map(|p| pair.constants(Place::Finite(p))));
    let export = srpair_core::certificates::CertificateExport::new(
        &pair.certificate,
        &pair.divisor,
        &constants,
        &pair.bad,
    );
    Ok(Output::ok(format!("seed = {}\n{}", cfg.seed, export.to_toml())))
}

fn green_options(cfg: &RunConfig) -> GreenOptions {
    GreenOptions {
        tol: cfg.tol,
        iter_cap: cfg.iter_cap,
        precision: cfg.precision,
        ..Default::default()
    }
}

fn places_at(pair: &AnalyzedPair, sel: PlaceSelector, x: &[BigRational]) -> Result<Vec<Place>, CliError> {
    Ok(match sel {
        PlaceSelector::Arch => vec![Place::Archimedean],
        PlaceSelector::Prime(p) => vec![Place::Finite(p)],
        PlaceSelector::All => {
            let mut v = vec![Place::Archimedean];
            v.extend(pair.contributing_primes(x)?.into_iter().map(Place::Finite));
            v
        }
    })
}

fn batch_header(cfg: &RunConfig, pair: &AnalyzedPair) -> String {
    let bad = pair.bad.primes().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",");
    format!(
        "# seed\t{}\n# tol\t{:e}\n# precision\t{}\n# certificate_m\t{}\n# bad_primes\t{}\n",
        cfg.seed,
        cfg.tol,
        cfg.precision,
        pair.certificate.m,
        if bad.is_empty() { "-" } else { &bad }
    )
}

fn cell(s: &str) -> String {
    s.replace(['\t', '\n'], " ")
}

fn fmt_error(e: f64) -> String {
    if e == 0.0 {
        "0".into()
    } else {
        format!("{e:e}")
    }
}

fn bound(rigorous: bool) -> &'static str {
    if rigorous {
        "rigorous"
    } else {
        "heuristic"
    }
}

/// Exit code for a batch: nonzero only when every row failed.
fn batch_code(errors: &[Option<CliError>]) -> i32 {
    if !errors.is_empty() && errors.iter().all(|e| e.is_some()) {
        errors[0].as_ref().map_or(0, |e| e.exit_code())
    } else {
        0
    }
}

fn green_row(v: &GreenValue) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}",
        v.value,
        fmt_error(v.error.value()),
        bound(v.is_rigorous()),
        v.region,
        v.iterations,
        v.exact.as_ref().map_or("-".into(), |e| e.to_string()),
        v.high.as_ref().map_or("-".into(), |h| h.to_decimal()),
    )
}

pub fn cmd_green(cfg: &RunConfig, points: &[Vec<BigRational>], member: MemberSel) -> Result<Output, CliError> {
    let input = pair_input(cfg)?;
    let pair = analyzed_pair(cfg, &input)?;
    let opts = green_options(cfg);
    let member_name = match member {
        MemberSel::F => "f",
        MemberSel::G => "g",
        MemberSel::Pair => "pair",
    };
    let rows: Vec<(String, Option<CliError>)> = points
        .par_iter()
        .flat_map_iter(|x| {
            let label = format_point(x);
            let places = match places_at(&pair, cfg.place, x) {
                Ok(p) => p,
                Err(e) => return vec![(format!("{label}\t{member_name}\t-\t{}", failed(&e, 7)), Some(e))],
            };
            places
                .into_iter()
                .map(|place| {
                    let r = match member {
                        MemberSel::F => green_eval(&pair, Member::First, x, place, &opts),
                        MemberSel::G => green_eval(&pair, Member::Second, x, place, &opts),
                        MemberSel::Pair => green_pair(&pair, x, place, &opts),
                    };
                    match r {
                        Ok(v) => (format!("{label}\t{member_name}\t{place}\t{}\tok", green_row(&v)), None),
                        Err(e) => {
                            let e = CliError::from(e);
                            (format!("{label}\t{member_name}\t{place}\t{}", failed(&e, 7)), Some(e))
                        }
                    }
                })
                .collect()
        })
        .collect();
    let mut text = batch_header(cfg, &pair);
    text.push_str("point\tmember\tplace\tvalue\terror\tbound\tregion\titerations\texact\thigh\tstatus\n");
    for (line, _) in &rows {
        text.push_str(line);
        text.push('\n');
    }
    let errors: Vec<Option<CliError>> = rows.into_iter().map(|(_, e)| e).collect();
    Ok(Output { text, code: batch_code(&errors) })
}

/// `n` placeholder cells followed by the error status.
fn failed(e: &CliError, n: usize) -> String {
    let mut s = "-\t".repeat(n);
    s.push_str(&cell(&format!("error: {e}")));
    s
}

fn height_places(h: &HeightValue) -> String {
    h.places
        .iter()
        .map(|t| format!("{}={}@{}", t.place, t.green.value, t.green.region))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn cmd_height(cfg: &RunConfig, points: &[Vec<BigRational>], forward: bool) -> Result<Output, CliError> {
    let input = pair_input(cfg)?;
    let pair = analyzed_pair(cfg, &input)?;
    let opts = green_options(cfg);
    let kind = if forward { "forward" } else { "pair" };
    let rows: Vec<(String, Option<CliError>)> = points
        .par_iter()
        .map(|x| {
            let label = format_point(x);
            let naive = naive_height(x).value;
            let r = if forward {
                canonical_height_forward(&pair, x, &opts)
            } else {
                canonical_height_pair(&pair, x, &opts)
            };
            match r {
                Ok(h) => (
                    format!(
                        "{label}\t{kind}\t{}\t{}\t{}\t{naive}\t{}\tok",
                        h.value,
                        fmt_error(h.error.value()),
                        bound(h.is_rigorous()),
                        height_places(&h)
                    ),
                    None,
                ),
                Err(e) => {
                    let e = CliError::from(e);
                    (format!("{label}\t{kind}\t-\t-\t-\t{naive}\t-\t{}", cell(&format!("error: {e}"))), Some(e))
                }
            }
        })
        .collect();
    let mut text = batch_header(cfg, &pair);
    text.push_str("point\tkind\tvalue\terror\tbound\tnaive\tplaces\tstatus\n");
    for (line, _) in &rows {
        text.push_str(line);
        text.push('\n');
    }
    let errors: Vec<Option<CliError>> = rows.into_iter().map(|(_, e)| e).collect();
    Ok(Output { text, code: batch_code(&errors) })
}

/// A Hénon map from `--quadratic c` or from a map or pair file.
pub fn henon_map(cfg: &RunConfig, quadratic: Option<&str>) -> Result<HenonMap, CliError> {
    if let Some(c) = quadratic {
        let c: BigRational = c
            .parse()
            .map_err(|_| CliError::Input(format!("bad constant {c:?}")))?;
        return Ok(HenonMap::quadratic(c));
    }
    let src = read_input(cfg)?;
    let f: PolyMap = match MapDocument::parse(&src) {
        Ok(doc) => doc.to_map()?,
        Err(_) => PairDocument::parse(&src)?.to_input()?.maps().0.clone(),
    };
    Ok(HenonMap::from_map(&f)?)
}

pub fn cmd_periodic(
    cfg: &RunConfig,
    f: &HenonMap,
    n: u32,
    exact: bool,
    numeric: &NumericOptions,
) -> Result<Output, CliError> {
    let mut set: PeriodicSet = if exact {
        let opts = ExactOptions {
            n_cap: cfg.n_cap,
            residual_tol: numeric.residual_tol,
            ..Default::default()
        };
        fixed_points_exact(f, n, &opts)?
    } else {
        periodic_points_numeric(f, n, numeric)?
    };
    set.seed = Some(cfg.seed);
    let head = format!(
        "# method\t{}\n# complete\t{}\n",
        if exact { "exact" } else { "numeric" },
        set.is_complete()
    );
    Ok(Output::ok(head + &set.to_tsv()))
}

pub fn cmd_equidist(
    f: &HenonMap,
    n_list: &[u32],
    suite: &[TestFunction],
    numeric: &NumericOptions,
) -> Result<Output, CliError> {
    let report = equidistribution_report(f, n_list, suite, numeric)?;
    Ok(Output::ok(report.to_tsv()))
}
