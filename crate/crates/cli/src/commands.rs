//! Subcommand flags and their implementations.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{value_parser, Args};
use critwin::percolation::{self, Estimand};
use critwin::specfun::{self, PrecisionSpec};
use critwin::{excursion, format, maximizer, oracles, scaling};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{emit_csv, emit_json, RunConfig};
use crate::range::{parse_finite, parse_ks, parse_positive, parse_range, Ks, Range};

/// Why a subcommand did not complete.
#[derive(Debug)]
pub enum Failure {
    /// Flags that parse individually but are inconsistent together.
    Usage(String),
    Compute(critwin::Error),
}

impl From<critwin::Error> for Failure {
    fn from(e: critwin::Error) -> Self {
        Failure::Compute(e)
    }
}

pub type Outcome = Result<(), Failure>;

#[derive(Debug, Args, Serialize)]
pub struct WrightArgs {
    /// Largest index ℓ.
    #[arg(long, default_value_t = 75, value_parser = value_parser!(u32).range(0..=excursion::MAX_ELL as i64))]
    pub max_ell: u32,
    /// Significant decimal digits (also the working precision).
    #[arg(long, default_value_t = 30, value_parser = value_parser!(u32).range(15..=200))]
    pub digits: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Pads the mantissa of `m.mmm e x` notation to `digits` significant digits.
fn pad_scientific(text: &str, digits: usize) -> String {
    let (mantissa, exponent) = text.split_once('e').unwrap_or((text, "0"));
    let (sign, unsigned) = mantissa.strip_prefix('-').map_or(("", mantissa), |m| ("-", m));
    let significant: String = unsigned.chars().filter(char::is_ascii_digit).collect();
    let mut padded = format!("{significant:0<digits$}");
    if digits > 1 {
        padded.insert(1, '.');
    }
    format!("{sign}{padded}e{exponent}")
}

pub fn wright(args: &WrightArgs) -> Outcome {
    let prec = PrecisionSpec::new(args.digits)?;
    let w = excursion::wright_constants(args.max_ell as usize, prec)?;
    let mut csv = String::from("ell,w_ell\n");
    for (ell, value) in w.iter().enumerate() {
        let digits = args.digits as usize;
        writeln!(csv, "{ell},{}", pad_scientific(&specfun::to_scientific(value, digits), digits)).unwrap();
    }
    emit_csv(&RunConfig::new("wright", "csv", args), args.out.as_deref(), &csv)?;
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct FkArgs {
    /// Comma-separated moment indices.
    #[arg(long, default_value = "2,3,4,6", value_parser = parse_ks)]
    pub k: Ks,
    /// `lo:hi:step` grid of λ values, or a single value.
    #[arg(long, default_value = "-1.75:3.75:0.05", value_parser = parse_range, allow_hyphen_values = true)]
    pub lambda: Range,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-8, value_parser = parse_positive)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn fk(args: &FkArgs) -> Outcome {
    let ks = &args.k.0;
    let rows = args
        .lambda
        .points()
        .par_iter()
        .map(|&l| scaling::fk_moments(ks, l, args.tol))
        .collect::<critwin::Result<Vec<_>>>()?;
    let mut csv = String::from("lambda");
    for k in ks {
        write!(csv, ",f{k}").unwrap();
    }
    csv.push_str(",error_estimate\n");
    for m in rows {
        let mut values = vec![m.lambda];
        values.extend(&m.values);
        values.push(m.errors.iter().cloned().fold(0.0, f64::max));
        csv.push_str(&format::csv_row(&values));
        csv.push('\n');
    }
    emit_csv(&RunConfig::new("fk", "csv", args), args.out.as_deref(), &csv)?;
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct Fk0Args {
    #[arg(long, default_value_t = 2, value_parser = value_parser!(u32).range(2..=12))]
    pub k: u32,
    /// Series terms summed exactly; the rest is bounded.
    #[arg(long, default_value_t = 75, value_parser = value_parser!(u32).range(1..=excursion::MAX_ELL as i64))]
    pub ell0: u32,
    #[arg(long, default_value_t = 30, value_parser = value_parser!(u32).range(15..=200))]
    pub digits: u32,
}

/// Prints one line `value,error_bound`.
pub fn fk0(args: &Fk0Args) -> Outcome {
    let prec = PrecisionSpec::new(args.digits)?;
    let v = scaling::fk_zero(args.k, args.ell0, prec)?;
    println!("{},{:e}", specfun::to_decimal(&v.value, args.digits as usize), v.error_bound);
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct ProfileArgs {
    #[arg(long, default_value = "-1.75:3.75:0.05", value_parser = parse_range, allow_hyphen_values = true)]
    pub lambda: Range,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn profile(args: &ProfileArgs) -> Outcome {
    let r = args.lambda;
    let csv = maximizer::profile_csv(r.lo, r.hi, r.step)?;
    emit_csv(&RunConfig::new("profile", "csv", args), args.out.as_deref(), &csv)?;
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct MaximizeArgs {
    #[arg(long, default_value_t = -2.0, value_parser = parse_finite, allow_negative_numbers = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 4.0, value_parser = parse_finite, allow_negative_numbers = true)]
    pub hi: f64,
    /// Width of the final bracket.
    #[arg(long, default_value_t = 1e-6, value_parser = parse_positive)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn maximize(args: &MaximizeArgs) -> Outcome {
    if args.lo >= args.hi {
        return Err(Failure::Usage(format!("--lo ({}) must be below --hi ({})", args.lo, args.hi)));
    }
    let report = maximizer::find_maximizer(args.lo, args.hi, args.tol)?;
    emit_json(&RunConfig::new("maximize", "json", args), args.out.as_deref(), &report)?;
    Ok(())
}

/// Comma-separated estimator names.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct Estimands(pub Vec<Estimand>);

fn parse_estimands(text: &str) -> Result<Estimands, String> {
    text.split(',')
        .map(|s| {
            Estimand::parse(s.trim()).ok_or_else(|| {
                let known: Vec<_> = Estimand::ALL.iter().map(|e| e.name()).collect();
                format!("unknown estimand '{s}', expected one of {}", known.join(", "))
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Estimands)
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1_000_000, value_parser = value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, default_value_t = 0.0, value_parser = parse_finite, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 200, value_parser = value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "x2,dlogchi,d1,d2,twolarge", value_parser = parse_estimands)]
    pub estimands: Estimands,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SimulateParams {
    n: u64,
    lambda: f64,
    p: f64,
    reps: u64,
    seed: u64,
}

#[derive(Serialize)]
struct EstimateEntry {
    name: String,
    mean: f64,
    stderr: f64,
    ci95: (f64, f64),
}

#[derive(Serialize)]
struct SimulateDocument {
    params: SimulateParams,
    estimates: Vec<EstimateEntry>,
}

pub fn simulate(args: &SimulateArgs) -> Outcome {
    let p = percolation::window_p(args.n, args.lambda)?;
    let summaries = percolation::estimate(&args.estimands.0, args.n, args.lambda, args.reps, args.seed)?;
    let document = SimulateDocument {
        params: SimulateParams { n: args.n, lambda: args.lambda, p, reps: args.reps, seed: args.seed },
        estimates: summaries
            .into_iter()
            .map(|s| EstimateEntry { name: s.name, mean: s.mean, stderr: s.stderr, ci95: s.ci95 })
            .collect(),
    };
    emit_json(&RunConfig::new("simulate", "json", args), args.out.as_deref(), &document)?;
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct CycleArgs {
    #[arg(long, value_parser = value_parser!(u64).range(3..))]
    pub n: u64,
    /// Single edge probability in (0, 1).
    #[arg(long, value_parser = parse_positive, conflicts_with = "scan")]
    pub p: Option<f64>,
    /// Scan `1 - p = t/n` for `t` log-spaced over `[0.01, min(50, n/2)]`.
    #[arg(long)]
    pub scan: bool,
    #[arg(long, default_value_t = 401, value_parser = value_parser!(u64).range(3..=1_000_000))]
    pub points: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn cycle_grid(n: u64, points: u64) -> Vec<f64> {
    let (lo, hi) = (0.01f64.ln(), (0.5 * n as f64).min(50.0).ln());
    let mut grid: Vec<f64> = (0..points)
        .map(|i| 1.0 - (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp() / n as f64)
        .collect();
    grid.reverse();
    grid
}

pub fn cycle(args: &CycleArgs) -> Outcome {
    let grid = match (args.p, args.scan) {
        (_, true) => cycle_grid(args.n, args.points),
        (Some(p), false) => vec![p],
        (None, false) => return Err(Failure::Usage("cycle needs --p or --scan".into())),
    };
    let mut csv = String::from("p,chi,dchi_dp,logder\n");
    for &p in &grid {
        let r = oracles::cycle_susceptibility(args.n, p)?;
        csv.push_str(&format::csv_row(&[r.p, r.chi, r.dchi_dp, r.logder]));
        csv.push('\n');
    }
    emit_csv(&RunConfig::new("cycle", "csv", args), args.out.as_deref(), &csv)?;
    if args.scan {
        let s = oracles::cycle_scan(args.n, &grid)?;
        eprintln!(
            "p* = {}, (1 - p*) n = {}, max logder = {}, max logder / n = {}{}",
            s.p_star,
            (1.0 - s.p_star) * args.n as f64,
            s.logder_max,
            s.logder_max / args.n as f64,
            if s.at_boundary { " (maximum on the grid boundary)" } else { "" }
        );
    }
    Ok(())
}
