//! Locating the maximiser `λ*` of `d/dλ log f(λ)` and tabulating the
//! log-profile.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format;
use crate::scaling;

/// Grid spacing of the coarse scan.
pub const GRID_STEP: f64 = 0.05;
const EVAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximizerReport {
    pub lambda_star: f64,
    pub g_star: f64,
    pub bracket: (f64, f64),
    pub unimodal_observed: bool,
    pub grid_step: f64,
    /// Largest grid value sat on an end of the window.
    pub at_boundary: bool,
    pub window: (f64, f64),
    /// `λ` of the best grid point.
    pub grid_argmax: f64,
}

/// `g(λ) = d/dλ log f(λ) = (f_4/2 - λ f_3) / f_2`.
pub fn log_derivative(lambda: f64, tol: f64) -> Result<f64> {
    let m = scaling::fk_moments(&[2, 3, 4], lambda, tol)?;
    Ok((0.5 * m.values[2] - lambda * m.values[1]) / m.values[0])
}

/// Points `j·step` inside `[lo, hi]`. Anchoring at multiples of the step makes
/// overlapping windows share grid points.
fn anchored_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|j| j as f64 * step).collect()
}

/// True when successive differences change sign exactly once, from rising to
/// falling.
fn rises_then_falls(values: &[f64]) -> bool {
    let signs: Vec<bool> = values.windows(2).filter(|w| w[1] != w[0]).map(|w| w[1] > w[0]).collect();
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    changes == 1 && signs.first() == Some(&true)
}

/// Coarse scan of `g` on `[lo, hi]` followed by golden-section refinement of
/// the bracket around the best grid point down to width `tol`.
pub fn find_maximizer(lo: f64, hi: f64, tol: f64) -> Result<MaximizerReport> {
    if !(lo < hi) || !(tol > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Precondition(format!(
            "maximizer needs finite lo < hi and tol > 0, got [{lo}, {hi}], tol = {tol}"
        )));
    }
    let grid = anchored_grid(lo, hi, GRID_STEP);
    if grid.len() < 3 {
        return Err(Error::Precondition(format!(
            "window [{lo}, {hi}] holds fewer than three grid points"
        )));
    }
    let values = grid
        .par_iter()
        .map(|&l| log_derivative(l, EVAL_TOL))
        .collect::<Result<Vec<f64>>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v > values[b] { i } else { b });
    let unimodal_observed = rises_then_falls(&values);
    let window = (lo, hi);
    if best == 0 || best == grid.len() - 1 {
        return Ok(MaximizerReport {
            lambda_star: grid[best],
            g_star: values[best],
            bracket: (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]),
            unimodal_observed,
            grid_step: GRID_STEP,
            at_boundary: true,
            window,
            grid_argmax: grid[best],
        });
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let (mut best_x, mut best_g) = (grid[best], values[best]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = log_derivative(c, EVAL_TOL)?;
    let mut gd = log_derivative(d, EVAL_TOL)?;
    while b - a > tol {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = log_derivative(c, EVAL_TOL)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = log_derivative(d, EVAL_TOL)?;
        }
        for (x, g) in [(c, gc), (d, gd)] {
            if g > best_g {
                best_x = x;
                best_g = g;
            }
        }
    }
    let mid = 0.5 * (a + b);
    let g_mid = log_derivative(mid, EVAL_TOL)?;
    if g_mid >= best_g {
        best_x = mid;
        best_g = g_mid;
    }
    Ok(MaximizerReport {
        lambda_star: best_x,
        g_star: best_g,
        bracket: (a.min(best_x) - tol, b.max(best_x) + tol),
        unimodal_observed,
        grid_step: GRID_STEP,
        at_boundary: false,
        window,
        grid_argmax: grid[best],
    })
}

/// CSV text with columns `lambda,log_f,dlog_f,d2log_f` over
/// `λ_lo, λ_lo + step, …, λ_hi`.
pub fn profile_csv(lambda_lo: f64, lambda_hi: f64, step: f64) -> Result<String> {
    let grid = scaling::linear_grid(lambda_lo, lambda_hi, step)?;
    let profile = scaling::log_f_profile(&grid, 1e-10)?;
    if let Some(f) = profile.failures.first() {
        return Err(Error::Precondition(format!("profile row at lambda = {} failed: {}", f.lambda, f.message)));
    }
    let mut out = String::from("lambda,log_f,dlog_f,d2log_f\n");
    for row in &profile.rows {
        out.push_str(&format::csv_row(&[row.lambda, row.log_f, row.dlog_f, row.d2log_f]));
        out.push('\n');
    }
    Ok(out)
}

/// Writes [`profile_csv`] to `path`.
pub fn emit_profile_csv(lambda_lo: f64, lambda_hi: f64, step: f64, path: &Path) -> Result<()> {
    let csv = profile_csv(lambda_lo, lambda_hi, step)?;
    fs::write(path, csv).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
