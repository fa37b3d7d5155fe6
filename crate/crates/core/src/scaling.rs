//! The scaling moments `f_k(λ) = ∫_0^∞ x^k Λ^{(λ)}(x) dx` and their
//! derivatives.
//!
//! At `λ = 0` the moments are summed in extended precision from the series
//! `f_k(0) = Σ_ℓ (2π)^{-1/2} w_ℓ I_{k,ℓ}` with a proven tail bound. Elsewhere
//! they are integrated in double precision.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::excursion;
use crate::quadrature::{self, QuadOptions};
use crate::specfun::{self, GammaSixths, PrecisionSpec, Real};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
/// Terms of the intensity sum below this fraction of the partial sum are
/// treated as negligible.
const INTENSITY_TERM_TOL: f64 = 1e-17;
const NEGLIGIBLE_RUN: usize = 5;

/// `F(x, λ) = ((x-λ)^3 + λ^3) / 6`, evaluated as `x((x - 3λ/2)^2 + 3λ²/4)/6`
/// to avoid cancellation.
pub fn big_f(x: f64, lambda: f64) -> f64 {
    let c = x - 1.5 * lambda;
    x * (c * c + 0.75 * lambda * lambda) / 6.0
}

/// Parameters of one evaluation of the intensity `Λ^{(λ)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityParams {
    pub lambda: f64,
    pub ell0: usize,
    pub x_max: f64,
}

impl IntensityParams {
    /// Default integration domain `(0, max(20, 2λ + 20)]`; `ell0` is the
    /// largest index the adaptive truncation may reach.
    pub fn new(lambda: f64) -> Self {
        let x_max = 20f64.max(2.0 * lambda + 20.0);
        Self { lambda, ell0: required_table_len(x_max), x_max }
    }
}

fn required_table_len(x_max: f64) -> usize {
    (1.5 * x_max.powi(3) / 12.0) as usize + 1000
}

/// `ln Σ_{ℓ ≤ ell0} w_ℓ x^{3ℓ/2}`, truncated adaptively once
/// [`NEGLIGIBLE_RUN`] consecutive terms fall below [`INTENSITY_TERM_TOL`]
/// times the partial sum. The sum starts at the peak index `x³/12` and walks
/// outward in both directions.
fn ln_wright_sum(x: f64, ln_w: &[f64], ell0: usize) -> f64 {
    let ln_x15 = 1.5 * x.ln();
    let last = ell0.min(ln_w.len() - 1);
    let peak = ((x * x * x / 12.0).round() as usize).min(last);
    let ln_peak = ln_w[peak] + peak as f64 * ln_x15;
    let cutoff = INTENSITY_TERM_TOL.ln();
    let mut sum = 1.0;
    let mut small = 0;
    for ell in (0..peak).rev() {
        let t = ln_w[ell] + ell as f64 * ln_x15 - ln_peak;
        sum += t.exp();
        if t - sum.ln() < cutoff {
            small += 1;
            if small >= NEGLIGIBLE_RUN {
                break;
            }
        } else {
            small = 0;
        }
    }
    small = 0;
    for ell in peak + 1..=last {
        let t = ln_w[ell] + ell as f64 * ln_x15 - ln_peak;
        sum += t.exp();
        if t - sum.ln() < cutoff {
            small += 1;
            if small >= NEGLIGIBLE_RUN {
                break;
            }
        } else {
            small = 0;
        }
    }
    ln_peak + sum.ln()
}

fn ln_intensity(x: f64, lambda: f64, ln_w: &[f64], ell0: usize) -> f64 {
    -LN_SQRT_2PI - 2.5 * x.ln() - big_f(x, lambda) + ln_wright_sum(x, ln_w, ell0)
}

/// `Λ^{(λ)}(x) = (2π)^{-1/2} x^{-5/2} e^{-F(x,λ)} Σ_{ℓ=0}^{ell0} w_ℓ x^{3ℓ/2}`.
pub fn lambda_intensity(x: f64, lambda: f64, ell0: usize) -> Result<f64> {
    if !(x > 0.0) || ell0 < 1 {
        return Err(Error::Precondition(format!(
            "intensity needs x > 0 and ell0 >= 1, got x = {x}, ell0 = {ell0}"
        )));
    }
    let ln_w = excursion::ln_wright_cached(ell0 + 1);
    Ok(ln_intensity(x, lambda, &ln_w, ell0).exp())
}

/// `I_{k,ℓ} = ∫_0^∞ x^{k+3ℓ/2-5/2} e^{-x³/6} dx = (1/3) 6^z Γ(z)` with
/// `z = k/3 + (ℓ-1)/2`.
pub fn ikl_exact(k: u32, ell: u32, prec: PrecisionSpec) -> Result<Real> {
    let gammas = GammaSixths::new(prec)?;
    ikl_with(k, ell, &gammas)
}

fn ikl_with(k: u32, ell: u32, gammas: &GammaSixths) -> Result<Real> {
    if k < 2 {
        return Err(Error::Precondition(format!("I_(k,l) needs k >= 2, got {k}")));
    }
    let prec = gammas.precision();
    let sixths = 2 * k + 3 * ell - 3;
    let z = prec.ratio(sixths as i64, 6);
    let six_pow = (z * prec.int(6).ln()).exp();
    Ok(six_pow * gammas.gamma(sixths)? / prec.int(3))
}

/// An extended-precision value with a proven bound on its absolute error.
#[derive(Debug, Clone)]
pub struct RigorousValue {
    pub value: Real,
    pub error_bound: f64,
}

impl RigorousValue {
    pub fn to_f64(&self) -> f64 {
        specfun::to_f64(&self.value)
    }
}

/// `f_k(0)` from the first `ell0 + 1` terms of its series.
///
/// All terms are positive, so the truncated sum is a lower bound; the error
/// bound adds the closed-form tail bound to a rounding budget proportional to
/// the number of terms.
pub fn fk_zero(k: u32, ell0: u32, prec: PrecisionSpec) -> Result<RigorousValue> {
    let table = excursion::excursion_moments(ell0 as usize, prec)?;
    let gammas = GammaSixths::new(prec)?;
    fk_zero_with(k, ell0, &table, &gammas)
}

fn fk_zero_with(
    k: u32,
    ell0: u32,
    table: &excursion::MomentTable,
    gammas: &GammaSixths,
) -> Result<RigorousValue> {
    let tail = specfun::series_tail_bound(k, ell0)?;
    let prec = gammas.precision();
    let mut sum = prec.int(0);
    for ell in 0..=ell0 {
        sum += table.wright[ell as usize].clone() * ikl_with(k, ell, gammas)?;
    }
    let value = sum / (prec.int(2) * prec.pi()).sqrt();
    let rounding = 64.0 * (ell0 as f64 + 2.0) * prec.unit_roundoff() * specfun::to_f64(&value);
    Ok(RigorousValue { value, error_bound: (tail + rounding).next_up() })
}

/// Series values and log-derivatives of `f = f_2` at `λ = 0`.
#[derive(Debug, Clone)]
pub struct ZeroReport {
    /// `f_2(0), …, f_6(0)`.
    pub moments: Vec<RigorousValue>,
    /// `f_2 f_6 - 8 f_2 - f_4²` at zero.
    pub numerator: RigorousValue,
    /// `f_2'(0) / f_2(0) = f_4(0) / (2 f_2(0))`.
    pub dlog_f: RigorousValue,
    /// `(f_2(f_6 - 8) - f_4²) / (4 f_2²)` at zero.
    pub d2log_f: RigorousValue,
}

pub fn zero_report(ell0: u32, prec: PrecisionSpec) -> Result<ZeroReport> {
    let table = excursion::excursion_moments(ell0 as usize, prec)?;
    let gammas = GammaSixths::new(prec)?;
    let moments = (2..=6)
        .map(|k| fk_zero_with(k, ell0, &table, &gammas))
        .collect::<Result<Vec<_>>>()?;
    let (f2, f4, f6) = (&moments[0], &moments[2], &moments[4]);
    let (d2, d4, d6) = (f2.error_bound, f4.error_bound, f6.error_bound);
    let (v2, v4, v6) = (f2.to_f64(), f4.to_f64(), f6.to_f64());
    let eight = table.precision.int(8);
    let four = table.precision.int(4);
    let two = table.precision.int(2);
    let num = f2.value.clone() * &f6.value - eight * &f2.value - f4.value.clone() * &f4.value;
    let num_err = ((v6 - 8.0).abs() * d2 + v2 * d6 + 2.0 * v4 * d4 + d2 * d6 + d4 * d4) * (1.0 + 1e-12);
    let num_val = specfun::to_f64(&num);
    let f2_sq = f2.value.clone() * &f2.value;
    let d2log = num.clone() / (four * &f2_sq);
    let low2 = v2 - d2;
    let d2log_err = (num_err / (4.0 * low2 * low2) + num_val.abs() * 2.0 * d2 / (4.0 * low2.powi(3))) * (1.0 + 1e-12);
    let dlog = f4.value.clone() / (two * &f2.value);
    let dlog_err = (d4 / (2.0 * low2) + v4 * d2 / (2.0 * low2 * low2)) * (1.0 + 1e-12);
    Ok(ZeroReport {
        numerator: RigorousValue { value: num, error_bound: num_err },
        d2log_f: RigorousValue { value: d2log, error_bound: d2log_err },
        dlog_f: RigorousValue { value: dlog, error_bound: dlog_err },
        moments,
    })
}

/// Quadrature estimates of several moments at one `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub lambda: f64,
    pub ks: Vec<u32>,
    pub values: Vec<f64>,
    /// Absolute error estimates, including the tail beyond `x_max`.
    pub errors: Vec<f64>,
}

impl MomentSet {
    pub fn get(&self, k: u32) -> Option<f64> {
        self.ks.iter().position(|&j| j == k).map(|i| self.values[i])
    }

    fn error(&self, k: u32) -> f64 {
        self.ks.iter().position(|&j| j == k).map_or(f64::INFINITY, |i| self.errors[i])
    }
}

/// Integrates `x^k Λ^{(λ)}(x)` for every `k` in `ks` at once, with estimated
/// relative error at most `tol` in each component.
///
/// The substitution `x = u²` removes the `x^{-1/2}` endpoint singularity.
/// The upper limit starts at `max(20, 2λ + 20)` and is pushed out while the
/// integrand at the cut is not negligible.
pub fn fk_moments(ks: &[u32], lambda: f64, tol: f64) -> Result<MomentSet> {
    if ks.is_empty() || ks.iter().any(|&k| k < 2) {
        return Err(Error::Precondition("moments need a nonempty set of k >= 2".into()));
    }
    if !(tol > 0.0) || !lambda.is_finite() {
        return Err(Error::Precondition(format!(
            "moment quadrature needs finite lambda and tol > 0, got lambda = {lambda}, tol = {tol}"
        )));
    }
    let mut params = IntensityParams::new(lambda);
    let kmax = *ks.iter().max().unwrap() as f64;
    let context = format!("f_k at lambda = {lambda}");
    loop {
        let ln_w = excursion::ln_wright_cached(params.ell0 + 1);
        let ell0 = params.ell0;
        let integrand = |u: f64, out: &mut [f64]| {
            let x = u * u;
            let ln_x = x.ln();
            let base = ln_intensity(x, lambda, &ln_w, ell0) + (2.0 * u).ln();
            for (o, &k) in out.iter_mut().zip(ks) {
                *o = (base + k as f64 * ln_x).exp();
            }
        };
        let result = quadrature::integrate(
            integrand,
            0.0,
            params.x_max.sqrt(),
            ks.len(),
            QuadOptions::relative(tol),
            &context,
        )?;
        // Beyond the cut the integrand decays at least like e^{-x³/24}, so
        // x_max times its value at the cut dominates the remainder.
        let x = params.x_max;
        let tail = (kmax * x.ln() + ln_intensity(x, lambda, &ln_w, ell0)).exp() * x;
        let smallest = result.values.iter().copied().fold(f64::INFINITY, f64::min);
        if tail <= 1e-2 * tol * smallest {
            let errors = result.errors.iter().map(|e| e + tail).collect();
            return Ok(MomentSet { lambda, ks: ks.to_vec(), values: result.values, errors });
        }
        params.x_max += 10.0;
        params.ell0 = required_table_len(params.x_max);
    }
}

/// `f_k(λ)` by adaptive quadrature.
pub fn fk_quadrature(k: u32, lambda: f64, tol: f64) -> Result<f64> {
    Ok(fk_moments(&[k], lambda, tol)?.values[0])
}

/// `f_k'` and `f_k''` from the moments alone:
///
/// ```text
/// f_k'  = f_{k+2}/2 - λ f_{k+1}
/// f_k'' = (f_{k+4}/2 - λ f_{k+3})/2 - f_{k+1} - λ (f_{k+3}/2 - λ f_{k+2})
///       = f_{k+4}/4 - λ f_{k+3} + λ² f_{k+2} - f_{k+1}
/// ```
fn derivative_from(m: &MomentSet, k: u32, order: u32) -> (f64, f64) {
    let l = m.lambda;
    let f = |j| m.get(j).expect("moment present");
    match order {
        1 => (
            0.5 * f(k + 2) - l * f(k + 1),
            0.5 * m.error(k + 2) + l.abs() * m.error(k + 1),
        ),
        _ => (
            0.25 * f(k + 4) - l * f(k + 3) + l * l * f(k + 2) - f(k + 1),
            0.25 * m.error(k + 4) + l.abs() * m.error(k + 3) + l * l * m.error(k + 2) + m.error(k + 1),
        ),
    }
}

/// `d^order/dλ^order f_k(λ)` for `order ∈ {1, 2}`.
pub fn fk_derivative(k: u32, lambda: f64, order: u32, tol: f64) -> Result<f64> {
    if !(1..=2).contains(&order) {
        return Err(Error::Precondition(format!("derivative order must be 1 or 2, got {order}")));
    }
    let ks: Vec<u32> = (k + 1..=k + 2 * order).collect();
    let m = fk_moments(&ks, lambda, tol)?;
    Ok(derivative_from(&m, k, order).0)
}

/// `(2k-5)!! / |λ|^{2k-3}` for `λ < 0` and `(2λ)^k` for `λ > 0`: the leading
/// behaviour of `f_k` far from the window.
pub fn asymptotic_reference(k: u32, lambda: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::Precondition(format!("asymptotics need k >= 2, got {k}")));
    }
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::Domain(format!("asymptotics need finite lambda != 0, got {lambda}")));
    }
    if lambda > 0.0 {
        Ok((2.0 * lambda).powi(k as i32))
    } else {
        let sf = specfun::semifactorial(2 * k as i64 - 5)? as f64;
        Ok(sf / lambda.abs().powi(2 * k as i32 - 3))
    }
}

/// `lo, lo + step, …` up to `hi` inclusive, computed as `lo + i·step` so that
/// rounding does not accumulate.
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo <= hi) || !(step > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Precondition(format!(
            "grid needs finite lo <= hi and step > 0, got {lo}:{hi}:{step}"
        )));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    if count > 10_000_000 {
        return Err(Error::Budget(format!("grid {lo}:{hi}:{step} has more than 10^7 points")));
    }
    Ok((0..=count)
        .map(|i| {
            let x = lo + i as f64 * step;
            // snap values that should be exact multiples of the step, such as 0
            let snapped = (x / step).round() * step;
            if (x - snapped).abs() < 1e-9 * step { snapped } else { x }
        })
        .collect())
}

/// One grid point of a [`ScalingProfile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub lambda: f64,
    /// `f_k(λ)` for each `k` of the profile, in order.
    pub fk: Vec<f64>,
    pub df2: f64,
    pub d2f2: f64,
    pub log_f: f64,
    pub dlog_f: f64,
    pub d2log_f: f64,
    /// Largest estimated relative error among the reported quantities.
    pub error_estimate: f64,
}

/// A grid point where quadrature failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFailure {
    pub lambda: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingProfile {
    pub ks: Vec<u32>,
    pub rows: Vec<ProfileRow>,
    pub failures: Vec<RowFailure>,
}

/// Evaluates `log f`, its first two derivatives and `f_2..=f_6` on a grid.
pub fn log_f_profile(grid: &[f64], tol: f64) -> Result<ScalingProfile> {
    log_f_profile_for(grid, &[2, 3, 4, 5, 6], tol)
}

/// As [`log_f_profile`], reporting `f_k` for the given `ks`.
///
/// Rows are independent and evaluated in parallel. At `λ = 0` the moments
/// come from the series, which is far more accurate than quadrature.
pub fn log_f_profile_for(grid: &[f64], ks: &[u32], tol: f64) -> Result<ScalingProfile> {
    if grid.iter().any(|l| !l.is_finite()) || !(tol > 0.0) {
        return Err(Error::Precondition("profile needs a finite grid and tol > 0".into()));
    }
    if ks.iter().any(|&k| k < 2) {
        return Err(Error::Precondition("profile moments need k >= 2".into()));
    }
    let mut needed: Vec<u32> = (2..=6).chain(ks.iter().copied()).collect();
    needed.sort_unstable();
    needed.dedup();
    let zero = if grid.contains(&0.0) {
        let report = zero_report(75, PrecisionSpec::default())?;
        let mut values: Vec<f64> = report.moments.iter().map(RigorousValue::to_f64).collect();
        let mut errors: Vec<f64> = report.moments.iter().map(|m| m.error_bound).collect();
        let extra: Vec<u32> = needed.iter().copied().filter(|&k| k > 6).collect();
        for k in &extra {
            let v = fk_zero(*k, 75.max(*k), PrecisionSpec::default())?;
            values.push(v.to_f64());
            errors.push(v.error_bound);
        }
        Some(MomentSet { lambda: 0.0, ks: needed.clone(), values, errors })
    } else {
        None
    };
    let inner_tol = (tol * 1e-2).max(1e-13);
    let outcomes: Vec<std::result::Result<ProfileRow, RowFailure>> = grid
        .par_iter()
        .map(|&lambda| {
            let moments = match (&zero, lambda == 0.0) {
                (Some(z), true) => Ok(z.clone()),
                _ => fk_moments(&needed, lambda, inner_tol),
            };
            moments
                .map(|m| profile_row(&m, ks))
                .map_err(|e| RowFailure { lambda, message: e.to_string() })
        })
        .collect();
    let mut rows = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(row) => rows.push(row),
            Err(f) => failures.push(f),
        }
    }
    Ok(ScalingProfile { ks: ks.to_vec(), rows, failures })
}

fn profile_row(m: &MomentSet, ks: &[u32]) -> ProfileRow {
    let f2 = m.get(2).expect("f_2 present");
    let e2 = m.error(2);
    let (df2, de1) = derivative_from(m, 2, 1);
    let (d2f2, de2) = derivative_from(m, 2, 2);
    let dlog_f = df2 / f2;
    let d2log_f = (f2 * d2f2 - df2 * df2) / (f2 * f2);
    let rel2 = e2 / f2;
    let rel_d1 = de1 / df2.abs() + rel2;
    let abs_d2 = de2 / f2 + d2f2.abs() * rel2 + 2.0 * dlog_f.abs() * (dlog_f.abs() * rel_d1);
    let error_estimate = rel2.max(rel_d1).max(abs_d2 / d2log_f.abs().max(1e-300));
    ProfileRow {
        lambda: m.lambda,
        fk: ks.iter().map(|&k| m.get(k).expect("moment present")).collect(),
        df2,
        d2f2,
        log_f: f2.ln(),
        dlog_f,
        d2log_f,
        error_estimate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use proptest::prelude::*;

    fn p30() -> PrecisionSpec {
        PrecisionSpec::default()
    }

    #[test]
    fn default_profile_grid_endpoints() {
        let g = linear_grid(-1.75, 3.75, 0.05).unwrap();
        assert_eq!(g.len(), 111);
        assert_eq!(g[0], -1.75);
        assert_eq!(*g.last().unwrap(), 3.75);
        assert!(g.contains(&0.0));
        assert!(linear_grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn big_f_examples() {
        assert!((big_f(2.0, 0.0) - 8.0 / 6.0).abs() < 1e-15);
        assert_eq!(big_f(0.0, 3.7), 0.0);
        let (x, l, h) = (1.3, 0.7, 1e-5);
        let fd = (big_f(x, l + h) - big_f(x, l - h)) / (2.0 * h);
        assert!((fd - (-x * x / 2.0 + l * x)).abs() < 1e-8);
    }

    #[test]
    fn intensity_small_x_limit() {
        for x in [1e-2, 1e-3, 1e-4] {
            let reference = (-LN_SQRT_2PI - 2.5 * f64::ln(x) - x * x * x / 6.0).exp();
            let ratio = lambda_intensity(x, 0.0, 75).unwrap() / reference;
            assert!((ratio - 1.0).abs() < 2.0 * x.powf(1.5), "x = {x}, ratio = {ratio}");
        }
        assert!(lambda_intensity(0.0, 0.0, 75).is_err());
    }

    #[test]
    fn intensity_integrates_to_f2() {
        let r = integrate(
            |u, o| {
                let x = u * u;
                o[0] = 2.0 * u * x * x * lambda_intensity(x, 0.0, 200).unwrap();
            },
            0.0,
            20f64.sqrt(),
            1,
            QuadOptions::relative(1e-10),
            "f2",
        )
        .unwrap();
        assert!((r.values[0] - 1.830470321422761).abs() < 1e-8);
    }

    #[test]
    fn ikl_examples() {
        let p = p30();
        let i31 = ikl_exact(3, 1, p).unwrap();
        assert!((specfun::to_f64(&i31) - 2.0).abs() < 1e-28);
        // ∫ x e^{-x³/6} dx by quadrature with x = t²
        let q = integrate(
            |t, o| o[0] = 2.0 * t * t * t * (-t.powi(6) / 6.0).exp(),
            0.0,
            3.0,
            1,
            QuadOptions::relative(1e-13),
            "i21",
        )
        .unwrap();
        let i21 = specfun::to_f64(&ikl_exact(2, 1, p).unwrap());
        assert!((i21 - q.values[0]).abs() < 1e-12);
        assert!((i21 - 1.4903).abs() < 1e-4);
        assert!(ikl_exact(1, 1, p).is_err());
    }

    #[test]
    fn ikl_bounded_by_closed_form() {
        let gammas = GammaSixths::new(p30()).unwrap();
        for k in 2..=6 {
            for ell in 1..=100 {
                let exact = specfun::to_f64(&ikl_with(k, ell, &gammas).unwrap().ln());
                assert!(exact <= specfun::ln_ikl_upper(k, ell).unwrap(), "k = {k}, ell = {ell}");
            }
        }
    }

    #[test]
    fn fk_zero_matches_published_constants() {
        let cases = [(2, 1.830470321422761), (3, 2.0), (4, 3.514851319980978), (6, 16.922562003970612)];
        for (k, expected) in cases {
            let v = fk_zero(k, 75, p30()).unwrap();
            assert!((v.to_f64() - expected).abs() <= 2e-15, "k = {k}");
            assert!(v.error_bound < 1e-17);
        }
    }

    #[test]
    fn fk_zero_is_lower_bound_and_increasing_in_ell0() {
        let a = fk_zero(3, 20, p30()).unwrap();
        let b = fk_zero(3, 40, p30()).unwrap();
        let two = p30().int(2);
        assert!(a.value < b.value && b.value < two);
        let gap = specfun::to_f64(&(two - &a.value));
        assert!(gap <= a.error_bound);
    }

    #[test]
    fn zero_report_values() {
        let z = zero_report(75, p30()).unwrap();
        assert!((specfun::to_f64(&z.numerator.value) - 3.9783051377505).abs() < 5e-13);
        assert!((specfun::to_f64(&z.d2log_f.value) - 0.296833365232).abs() < 1e-11);
        assert!((specfun::to_f64(&z.dlog_f.value) - 0.5 * 3.514851319980978 / 1.830470321422761).abs() < 1e-14);
        assert!(z.d2log_f.error_bound < 1e-16);
    }

    #[test]
    fn quadrature_matches_series_at_zero() {
        let z = zero_report(75, p30()).unwrap();
        let m = fk_moments(&[2, 3, 4, 5, 6], 0.0, 1e-11).unwrap();
        for (i, k) in (2..=6).enumerate() {
            let series = z.moments[i].to_f64();
            assert!((m.values[i] / series - 1.0).abs() < 1e-8, "k = {k}");
        }
    }

    #[test]
    fn derivatives_at_zero() {
        assert!((fk_derivative(2, 0.0, 1, 1e-11).unwrap() - 1.757425659990489).abs() < 1e-8);
        assert!((fk_derivative(2, 0.0, 2, 1e-11).unwrap() - 2.230640500992653).abs() < 1e-8);
        assert!(fk_derivative(2, 0.0, 3, 1e-11).is_err());
    }

    #[test]
    fn asymptotic_reference_examples() {
        assert_eq!(asymptotic_reference(2, -4.0).unwrap(), 0.25);
        assert_eq!(asymptotic_reference(2, 3.0).unwrap(), 36.0);
        assert!((asymptotic_reference(4, -10.0).unwrap() - 3e-5).abs() < 1e-19);
        assert!(matches!(asymptotic_reference(2, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn profile_rows_are_consistent() {
        let grid = [-1.0, 0.0, 1.0];
        let p = log_f_profile(&grid, 1e-8).unwrap();
        assert!(p.failures.is_empty());
        assert_eq!(p.rows.len(), 3);
        let zero = &p.rows[1];
        assert!((zero.d2log_f - 0.296833365232).abs() < 1e-11);
        for row in &p.rows {
            assert!(row.fk.iter().all(|&f| f > 0.0));
            assert!(row.dlog_f > 0.0);
            assert!((row.log_f - row.fk[0].ln()).abs() < 1e-15);
        }
        assert!(p.rows[0].fk[0] < p.rows[1].fk[0] && p.rows[1].fk[0] < p.rows[2].fk[0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn moments_positive_and_satisfy_identity(lambda in -5.0f64..5.0) {
            let m = fk_moments(&[2, 3], lambda, 1e-10).unwrap();
            let (f2, f3) = (m.values[0], m.values[1]);
            prop_assert!(f2 > 0.0 && f3 > 0.0);
            prop_assert!((f3 - 2.0 - 2.0 * lambda * f2).abs() < 1e-7 * (1.0 + f3.abs()));
        }

        #[test]
        fn big_f_nonnegative(x in 0.0f64..50.0, lambda in -30.0f64..30.0) {
            prop_assert!(big_f(x, lambda) >= 0.0);
        }
    }
}
