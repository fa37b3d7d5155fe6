//! Self-checks against exact oracles and known constants.
//!
//! The quick tier runs enumeration and analytic checks in seconds. The full
//! tier adds the Monte Carlo suites at `n = 10^6`.

use std::fmt::Write as _;

use clap::{Args, ValueEnum};
use critwin::oracles::{self, ratio, GnpPolynomials};
use critwin::percolation::{self, Estimand};
use critwin::specfun::{self, PrecisionSpec};
use critwin::{excursion, maximizer, scaling};
use dashu_ratio::RBig;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Oracles,
    Scaling,
    Excursion,
    Percolation,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Enumeration and analytic checks only (the default).
    #[arg(long, conflicts_with = "full")]
    pub quick: bool,
    /// Also run the Monte Carlo suites at n = 10^6.
    #[arg(long)]
    pub full: bool,
}

struct Check {
    suite: &'static str,
    name: &'static str,
    passed: bool,
    /// Distance to the failure threshold; `None` for exact identities.
    margin: Option<f64>,
    detail: String,
}

type Found = critwin::Result<(bool, Option<f64>, String)>;

/// Passes when `|value - target| <= tol`; the margin is the unused tolerance.
fn near(value: f64, target: f64, tol: f64) -> Found {
    let margin = tol - (value - target).abs();
    Ok((margin >= 0.0, Some(margin), format!("{value} vs {target} ± {tol:e}")))
}

fn exact(ok: bool, detail: String) -> Found {
    Ok((ok, None, detail))
}

fn p_grid() -> Vec<RBig> {
    (1..=10).map(|k| ratio(k, 11)).collect()
}

fn sum_identities() -> Found {
    let mut failures = 0;
    for n in 1..=5 {
        let polys = GnpPolynomials::enumerate(n)?;
        for p in p_grid() {
            let r = oracles::report_at(&polys, &p);
            failures += usize::from(r.s_n != r.e_s[1]);
            failures += usize::from((RBig::ONE - &p) * &r.ds_n_dp != r.e_pair_product);
        }
    }
    exact(failures == 0, format!("n <= 5 at 10 values of p, {failures} failures"))
}

fn pivotal() -> Found {
    let c = oracles::verify_pivotal_identity(5)?;
    exact(c.mismatches == 0, format!("{} graphs, {} mismatches", c.graphs, c.mismatches))
}

fn tree_graph() -> Found {
    let mut failures = 0;
    for n in 1..=5 {
        for p in p_grid() {
            for k in 2..=3 {
                failures += usize::from(!oracles::verify_tree_graph(n, &p, k)?.holds);
            }
        }
    }
    exact(failures == 0, format!("k in {{2, 3}}, n <= 5, {failures} failures"))
}

fn cycle_enumeration() -> Found {
    let formula = oracles::cycle_susceptibility(8, 0.5)?.chi;
    let counted = oracles::cycle_chi_enumerated(8, 0.5)?;
    near(formula, counted, 1e-12)
}

fn rho_value() -> Found {
    near(oracles::rho_solver(1.0)?, 0.7968, 5e-5)
}

fn subcritical_bound() -> Found {
    let r = oracles::verify_susceptibility_bounds(5, 0.1, 0.5, 0, 0)?;
    Ok((r.subcritical.passed, Some(r.subcritical.margin), format!("E|C(v)| = {} <= 2", r.subcritical.mean)))
}

fn constants() -> Found {
    let expected = [(2, 1.830470321422761), (4, 3.514851319980978), (6, 16.922562003970612)];
    let mut margin = f64::INFINITY;
    let mut worst_bound = 0f64;
    for (k, target) in expected {
        let v = scaling::fk_zero(k, 75, PrecisionSpec::default())?;
        margin = margin.min(2e-15 - (v.to_f64() - target).abs());
        worst_bound = worst_bound.max(v.error_bound);
    }
    let ok = margin >= 0.0 && worst_bound < 1e-17;
    Ok((ok, Some(margin), format!("f_2, f_4, f_6 at zero, largest error bound {worst_bound:e}")))
}

fn numerator() -> Found {
    let z = scaling::zero_report(75, PrecisionSpec::default())?;
    near(specfun::to_f64(&z.numerator.value), 3.9783051377505, 5e-13)
}

fn curvature() -> Found {
    let z = scaling::zero_report(75, PrecisionSpec::default())?;
    near(specfun::to_f64(&z.d2log_f.value), 0.296833365232, 1e-11)
}

fn f3_identity() -> Found {
    let mut worst = 0f64;
    for lambda in [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0] {
        let m = scaling::fk_moments(&[2, 3], lambda, 1e-12)?;
        worst = worst.max((m.values[1] - 2.0 - 2.0 * lambda * m.values[0]).abs());
    }
    Ok((worst < 1e-7, Some(1e-7 - worst), format!("max |f3 - 2 - 2λ f2| = {worst:e}")))
}

fn asymptotics() -> Found {
    let mut margin = f64::INFINITY;
    for lambda in [-5.0f64, -10.0, -20.0] {
        let f2 = scaling::fk_quadrature(2, lambda, 1e-12)?;
        margin = margin.min(3.0 * lambda.abs().powi(-3) - (lambda.abs() * f2 - 1.0).abs());
    }
    Ok((margin >= 0.0, Some(margin), "|λ f2 - 1| <= 3|λ|^-3 at λ = -5, -10, -20".into()))
}

fn maximizer_location() -> Found {
    let r = maximizer::find_maximizer(-2.0, 4.0, 1e-6)?;
    let margin = 0.5 - (r.lambda_star - 1.0).abs();
    Ok((margin >= 0.0 && !r.at_boundary, Some(margin), format!("λ* = {}", r.lambda_star)))
}

fn wright_bound() -> Found {
    let table = excursion::excursion_moments(75, PrecisionSpec::default())?;
    let mut margin = f64::INFINITY;
    for ell in 1..=75 {
        let ln_w = specfun::to_f64(&table.wright[ell].ln());
        margin = margin.min(specfun::ln_wl_upper(ell as u32)? - ln_w);
    }
    Ok((margin >= 0.0, Some(margin), "log-scale gap below the bound, 1 <= ℓ <= 75".into()))
}

fn first_moment() -> Found {
    let table = excursion::excursion_moments(4, PrecisionSpec::default())?;
    near(specfun::to_f64(&table.moments[1]), (std::f64::consts::PI / 8.0).sqrt(), 1e-15)
}

fn excursion_mc() -> Found {
    let table = excursion::excursion_moments(6, PrecisionSpec::default())?;
    let mc = excursion::mc_excursion_area(1_000_000, 1000, 42)?;
    let worst = (1..=6)
        .map(|l| ((mc.moments[l] - specfun::to_f64(&table.moments[l])) / mc.stderr[l]).abs())
        .fold(0f64, f64::max);
    Ok((worst <= 4.0, Some(4.0 - worst), format!("largest |z| = {worst:.2} over ℓ <= 6")))
}

fn mc_limits() -> Found {
    let est = percolation::estimate(&Estimand::ALL, 1_000_000, 0.0, 200, 42)?;
    let targets = [(0.05, 1.8305), (0.10, 0.9601), (0.10, 1.7574), (0.25, 2.2306)];
    let mut margin = f64::INFINITY;
    let mut detail = String::new();
    for (s, (tol, target)) in est.iter().zip(targets) {
        let rel = (s.mean - target) / target;
        margin = margin.min(tol - rel.abs());
        write!(detail, "{} {:+.3}, ", s.name, rel).unwrap();
    }
    let two = &est[4];
    write!(detail, "P(L) = {} ci95 [{:.4}, {:.4}]", two.mean, two.ci95.0, two.ci95.1).unwrap();
    Ok((margin >= 0.0 && two.ci95.0 > 0.0, Some(margin), detail))
}

fn coupled() -> Found {
    let n = 100_000;
    let ps = [-2.0, 0.0, 2.0].map(|l| percolation::window_p(n, l).unwrap());
    let mut violations = 0;
    for seed in 0..50 {
        let stats = percolation::coupled_sample(n, &ps, seed)?;
        let x2: Vec<f64> = stats.iter().map(|s| s.functionals().xk(2)).collect();
        violations += x2.windows(2).filter(|w| w[0] > w[1]).count();
    }
    exact(violations == 0, format!("50 seeds, {violations} violations"))
}

fn window_susceptibility() -> Found {
    let n = 1_000_000u64;
    let eps = (n as f64).powf(-1.0 / 3.0);
    let r = oracles::verify_susceptibility_bounds(n, percolation::window_p(n, 0.0)?, eps, 50, 42)?;
    let c = r.supercritical;
    Ok((c.passed, Some(c.margin), format!("E|C(v)| = {:.1} <= {:.1}", c.mean, c.bound)))
}

type Entry = (&'static str, &'static str, bool, fn() -> Found);

const CHECKS: &[Entry] = &[
    ("oracles", "sum identities", false, sum_identities),
    ("oracles", "pivotal identity", false, pivotal),
    ("oracles", "tree-graph inequality", false, tree_graph),
    ("oracles", "cycle formula", false, cycle_enumeration),
    ("oracles", "survival root", false, rho_value),
    ("oracles", "subcritical bound", false, subcritical_bound),
    ("scaling", "constants at zero", false, constants),
    ("scaling", "numerator at zero", false, numerator),
    ("scaling", "log curvature at zero", false, curvature),
    ("scaling", "f3 identity", false, f3_identity),
    ("scaling", "asymptotics", false, asymptotics),
    ("scaling", "maximizer", false, maximizer_location),
    ("excursion", "Wright bound", false, wright_bound),
    ("excursion", "first moment", false, first_moment),
    ("excursion", "Monte Carlo moments", true, excursion_mc),
    ("percolation", "limits at n = 10^6", true, mc_limits),
    ("percolation", "coupled monotonicity", true, coupled),
    ("percolation", "window susceptibility", true, window_susceptibility),
];

/// Runs the selected checks, prints the table, and reports overall success.
pub fn run(args: &VerifyArgs) -> bool {
    let selected = CHECKS.iter().filter(|(suite, _, slow, _)| {
        let suite_ok = args.suite == Suite::All || Suite::from_str(suite, true).ok() == Some(args.suite);
        suite_ok && (args.full || !slow)
    });
    let checks: Vec<Check> = selected
        .map(|&(suite, name, _, f)| {
            let (passed, margin, detail) = f().unwrap_or_else(|e| (false, None, format!("error: {e}")));
            Check { suite, name, passed, margin, detail }
        })
        .collect();
    println!("{:<12} {:<24} {:<6} {:>12}  detail", "suite", "check", "status", "margin");
    for c in &checks {
        let margin = c.margin.map_or("exact".to_string(), |m| format!("{m:.3e}"));
        let status = if c.passed { "pass" } else { "FAIL" };
        println!("{:<12} {:<24} {:<6} {:>12}  {}", c.suite, c.name, status, margin, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {} failed", checks.len(), failed);
    failed == 0
}
