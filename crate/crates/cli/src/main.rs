//! `srpair`: regularity checks, certificates, Green functions, canonical
//! heights and periodic points for pairs of polynomial maps.

mod commands;
mod config;
mod error;
mod points;

use clap::{Args, Parser, Subcommand};
use commands::{MemberSel, Output};
use config::{parse_n_list, resolve_precision, PlaceSelector, RunConfig};
use error::CliError;
use num_rational::BigRational;
use srpair_core::periodic::{NumericOptions, TestFunction};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "srpair", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Total error tolerance for Green function and height values.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Largest certificate degree M to try (default d_f*d_g + n).
    #[arg(long, global = true)]
    mmax: Option<u32>,
    /// Check algebraic stability up to this iterate.
    #[arg(long, global = true, default_value_t = 3)]
    stable_up_to: u32,
    /// Largest period for exact elimination.
    #[arg(long, global = true, default_value_t = 3)]
    n_cap: u32,
    /// Iteration cap per place (default 1000 archimedean, 100 p-adic).
    #[arg(long, global = true)]
    iter_cap: Option<u32>,
    /// `arch`, a prime, or `all` contributing places.
    #[arg(long, global = true, default_value = "all")]
    place: PlaceSelector,
    /// `f64` or `hp`; falls back to $SRPAIR_PREC.
    #[arg(long, global = true)]
    prec: Option<String>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct PointArgs {
    /// A point such as `1/5,2`; repeatable.
    #[arg(long = "point", allow_hyphen_values = true)]
    point: Vec<String>,
    /// File with one point per line.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HenonArgs {
    /// Map or pair file holding a Hénon map.
    input: Option<PathBuf>,
    /// Use (y, y^2 + c - x) instead of an input file.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "input")]
    quadratic: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    dedupe_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    residual_tol: f64,
    /// Start budget of the numeric search.
    #[arg(long)]
    max_starts: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether the pair is strongly regular.
    Check { input: PathBuf },
    /// Joint regularity certificate, constants and bad primes.
    Certificate {
        input: PathBuf,
        /// Skip the regularity check.
        #[arg(long)]
        force: bool,
    },
    /// Local Green function values.
    Green {
        input: PathBuf,
        #[command(flatten)]
        points: PointArgs,
        #[arg(long, value_enum, default_value_t = MemberSel::Pair)]
        member: MemberSel,
    },
    /// Canonical heights.
    Height {
        input: PathBuf,
        #[command(flatten)]
        points: PointArgs,
        /// Height of the first member alone instead of the pair height.
        #[arg(long)]
        forward: bool,
    },
    /// Points of period dividing n of a Hénon map.
    Periodic {
        #[command(flatten)]
        map: HenonArgs,
        #[arg(short, long)]
        n: u32,
        /// Elimination instead of multi-start Newton.
        #[arg(long)]
        exact: bool,
    },
    /// Test-function averages over the periodic point measures.
    Equidist {
        #[command(flatten)]
        map: HenonArgs,
        /// Periods, as `3..6` or `3,4,5`.
        #[arg(long)]
        n_list: String,
        /// Comma-separated test functions (default all but `one`).
        #[arg(long)]
        suite: Option<String>,
    },
}

fn load_points(args: &PointArgs) -> Result<Vec<Vec<BigRational>>, CliError> {
    let mut out: Vec<Vec<BigRational>> = args
        .point
        .iter()
        .map(|p| points::parse_point(p))
        .collect::<Result<_, _>>()?;
    if let Some(path) = &args.points {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        out.extend(points::parse_points(&src)?);
    }
    if out.is_empty() {
        return Err(CliError::Input("no points given".into()));
    }
    Ok(out)
}

fn numeric_options(cfg: &RunConfig, m: &HenonArgs) -> NumericOptions {
    let d = NumericOptions::default();
    NumericOptions {
        seed: cfg.seed,
        dedupe_tol: m.dedupe_tol,
        residual_tol: m.residual_tol,
        max_starts: m.max_starts.unwrap_or(d.max_starts),
        ..d
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let input = match &cli.command {
        Command::Check { input }
        | Command::Certificate { input, .. }
        | Command::Green { input, .. }
        | Command::Height { input, .. } => Some(input.clone()),
        Command::Periodic { map, .. } | Command::Equidist { map, .. } => map.input.clone(),
    };
    let cfg = RunConfig {
        input,
        tol: cli.tol,
        mmax: cli.mmax,
        m_max: cli.stable_up_to,
        n_cap: cli.n_cap,
        iter_cap: cli.iter_cap,
        place: cli.place,
        precision: resolve_precision(cli.prec.as_deref())?,
        out: cli.out,
        seed: cli.seed,
    };
    cfg.validate()?;
    let output: Output = match &cli.command {
        Command::Check { .. } => commands::cmd_check(&cfg),
        Command::Certificate { force, .. } => commands::cmd_certificate(&cfg, *force),
        Command::Green { points, member, .. } => commands::cmd_green(&cfg, &load_points(points)?, *member),
        Command::Height { points, forward, .. } => commands::cmd_height(&cfg, &load_points(points)?, *forward),
        Command::Periodic { map, n, exact } => {
            let f = commands::henon_map(&cfg, map.quadratic.as_deref())?;
            commands::cmd_periodic(&cfg, &f, *n, *exact, &numeric_options(&cfg, map))
        }
        Command::Equidist { map, n_list, suite } => {
            let f = commands::henon_map(&cfg, map.quadratic.as_deref())?;
            let n_list = parse_n_list(n_list).map_err(CliError::Input)?;
            let suite: Vec<TestFunction> = match suite {
                Some(s) => s
                    .split(',')
                    .map(|t| t.trim().parse().map_err(|e| CliError::Input(format!("{e}"))))
                    .collect::<Result<_, _>>()?,
                None => TestFunction::DEFAULT_SUITE.to_vec(),
            };
            commands::cmd_equidist(&f, &n_list, &suite, &numeric_options(&cfg, map))
        }
    }?;
    write_output(cfg.out.as_ref(), &output.text)?;
    Ok(output.code)
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("srpair: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
