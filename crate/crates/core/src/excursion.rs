//! Moments of the Brownian excursion area and Wright's constants.
//!
//! Wright's constants come from the recursion
//!
//! ```text
//! K_0 = -1/2,
//! K_k = (3k-4)/4 K_{k-1} + Σ_{j=1}^{k-1} K_j K_{k-j},
//! w_ℓ = 4√π 2^{-ℓ/2} K_ℓ / Γ((3ℓ-1)/2),   ℓ ≥ 1,
//! ```
//!
//! with `M_ℓ = ℓ! w_ℓ` the ℓ-th moment of the excursion area. The `K_k` are
//! exact rationals; the only rounding comes from `√π`, `√2` and the gamma
//! values.

use std::sync::{Arc, Mutex, OnceLock};

use dashu_int::IBig;
use dashu_ratio::RBig;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::specfun::{self, GammaSixths, PrecisionSpec, Real};
use crate::stats::Welford;

/// Largest index accepted by [`excursion_moments`].
pub const MAX_ELL: usize = 2000;

/// Excursion-area moments `M_0..=M_L` and Wright's constants `w_0..=w_L`.
#[derive(Debug, Clone)]
pub struct MomentTable {
    pub max_ell: usize,
    pub moments: Vec<Real>,
    pub wright: Vec<Real>,
    pub precision: PrecisionSpec,
}

/// Exact rationals `K_0..=K_max`.
pub(crate) fn takacs_k(max_ell: usize) -> Vec<RBig> {
    let mut k: Vec<RBig> = Vec::with_capacity(max_ell + 1);
    k.push(RBig::from_parts(IBig::from(-1), 2u8.into()));
    for n in 1..=max_ell {
        let mut conv = RBig::ZERO;
        for j in 1..=(n - 1) / 2 {
            conv += &k[j] * &k[n - j];
        }
        conv *= RBig::from(2);
        if n % 2 == 0 && n >= 2 {
            conv += &k[n / 2] * &k[n / 2];
        }
        let lead = RBig::from_parts(IBig::from(3 * n as i64 - 4), 4u8.into()) * &k[n - 1];
        k.push(lead + conv);
    }
    k
}

/// Computes the moment table through `max_ell` and checks its invariants.
///
/// Fails with [`Error::Precision`] if the result violates positivity, the
/// Wright bound or moment log-convexity, which is how loss of accuracy would
/// show up.
pub fn excursion_moments(max_ell: usize, prec: PrecisionSpec) -> Result<MomentTable> {
    if max_ell > MAX_ELL {
        return Err(Error::Precondition(format!(
            "max_ell = {max_ell} exceeds the supported maximum {MAX_ELL}"
        )));
    }
    // Rounding grows roughly linearly in the number of operations per entry.
    let growth = 16.0 * (max_ell as f64 + 10.0) * prec.unit_roundoff();
    if growth > prec.relative_tolerance() {
        return Err(Error::Precision(format!(
            "{} digits cannot carry max_ell = {max_ell}",
            prec.digits()
        )));
    }
    let k = takacs_k(max_ell);
    let gammas = GammaSixths::new(prec)?;
    let four_sqrt_pi = prec.int(4) * prec.pi().sqrt();
    let inv_sqrt2 = prec.int(1) / prec.int(2).sqrt();

    let mut wright = Vec::with_capacity(max_ell + 1);
    let mut moments = Vec::with_capacity(max_ell + 1);
    wright.push(prec.int(1));
    moments.push(prec.int(1));
    let mut factorial = prec.int(1);
    for ell in 1..=max_ell {
        let gamma = gammas.gamma((9 * ell - 3) as u32)?;
        let half_pow = prec.ubig(dashu_int::UBig::ONE << (ell / 2));
        let mut w = four_sqrt_pi.clone() * prec.rational(&k[ell]) / (gamma * half_pow);
        if ell % 2 == 1 {
            w *= &inv_sqrt2;
        }
        factorial *= prec.int(ell as i64);
        moments.push(w.clone() * &factorial);
        wright.push(w);
    }
    let table = MomentTable { max_ell, moments, wright, precision: prec };
    check_invariants(&table)?;
    Ok(table)
}

fn check_invariants(table: &MomentTable) -> Result<()> {
    for (ell, w) in table.wright.iter().enumerate() {
        if *w <= Real::ZERO {
            return Err(Error::Precision(format!("w_{ell} is not positive")));
        }
        if ell >= 1 {
            let ln_w = specfun::to_f64(&w.ln());
            if ln_w > specfun::ln_wl_upper(ell as u32)? {
                return Err(Error::Precision(format!("w_{ell} exceeds its upper bound")));
            }
        }
    }
    for ell in 1..table.max_ell {
        let m = &table.moments;
        if m[ell].clone() * &m[ell] > m[ell - 1].clone() * &m[ell + 1] {
            return Err(Error::Precision(format!("moments are not log-convex at {ell}")));
        }
    }
    Ok(())
}

/// Wright's constants `w_0..=w_max`.
pub fn wright_constants(max_ell: usize, prec: PrecisionSpec) -> Result<Vec<Real>> {
    Ok(excursion_moments(max_ell, prec)?.wright)
}

/// `ln w_ℓ` for `ℓ = 0..=max_ell` in double precision.
///
/// Uses the rescaled sequence `κ_k = K_k / (Γ(k) (3/4)^k)`, which tends to
/// `1/(2π)` and satisfies
/// `κ_k = (3k-4)/(3k-3) κ_{k-1} + Σ_j B(j, k-j) κ_j κ_{k-j}`,
/// so the table stays finite for indices far beyond the range of `f64`.
pub fn ln_wright_table(max_ell: usize) -> Vec<f64> {
    let mut kappa = vec![0.0f64; max_ell.max(1) + 1];
    kappa[1] = 1.0 / 6.0;
    for n in 2..=max_ell {
        let mut conv = 0.0;
        let mut beta = 1.0 / (n - 1) as f64;
        let mut j = 1;
        while 2 * j <= n {
            let term = beta * kappa[j] * kappa[n - j];
            conv += if 2 * j == n { term } else { 2.0 * term };
            if term < 1e-19 * conv {
                break;
            }
            if n - j > 1 {
                beta *= j as f64 / (n - j - 1) as f64;
            }
            j += 1;
        }
        kappa[n] = (3 * n - 4) as f64 / (3 * n - 3) as f64 * kappa[n - 1] + conv;
    }
    let c = (4.0 * std::f64::consts::PI.sqrt()).ln();
    let mut table = Vec::with_capacity(max_ell + 1);
    table.push(0.0);
    for ell in 1..=max_ell {
        let l = ell as f64;
        table.push(
            c - 0.5 * l * std::f64::consts::LN_2 + kappa[ell].ln() + specfun::ln_gamma_f64(l)
                + l * 0.75f64.ln()
                - specfun::ln_gamma_f64((3.0 * l - 1.0) / 2.0),
        );
    }
    table
}

/// Shared [`ln_wright_table`] covering at least `min_len` entries.
pub fn ln_wright_cached(min_len: usize) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<Arc<Vec<f64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Arc::new(ln_wright_table(1024))));
    let mut guard = cache.lock().expect("wright cache poisoned");
    if guard.len() < min_len {
        let target = min_len.max(2 * guard.len());
        *guard = Arc::new(ln_wright_table(target - 1));
    }
    Arc::clone(&guard)
}

/// Monte Carlo estimates of the excursion-area moments `M̂_0..=M̂_6`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcursionMcEstimate {
    pub paths: u64,
    pub steps: u64,
    pub seed: u64,
    pub moments: Vec<f64>,
    pub stderr: Vec<f64>,
}

const MC_MAX_MOMENT: usize = 6;
const MC_CHUNK: u64 = 1024;

/// Area under a uniform Dyck path with `2m` steps, drawn via the cycle lemma:
/// a uniformly shuffled word of `m` up and `m + 1` down steps has exactly one
/// rotation that stays nonnegative until its final step.
pub(crate) fn dyck_area(m: u64, rng: &mut StreamRng) -> u64 {
    let total = 2 * m + 1;
    let (mut ups, mut remaining) = (m, total);
    let (mut height, mut sum) = (0i64, 0i64);
    let (mut min, mut argmin) = (0i64, 0u64);
    for pos in 1..=total {
        if rng::bernoulli_ratio(rng, ups, remaining) {
            ups -= 1;
            height += 1;
        } else {
            height -= 1;
        }
        remaining -= 1;
        sum += height;
        if height < min {
            min = height;
            argmin = pos;
        }
    }
    // Rotating to start after the first minimum gives partial sums S_p - S_t
    // before the wrap and S_p - S_t - 1 after it; the final -1 is dropped.
    (sum - total as i64 * min - argmin as i64 + 1) as u64
}

/// Estimates `E(B_ex^ℓ)`, `ℓ ≤ 6`, from discrete excursions.
///
/// Each path contributes `2 A_{2n}^ℓ - A_n^ℓ`, where `A_n` is the area of an
/// independent `n`-step excursion divided by `n^{3/2}` and shifted by
/// `n^{-1/2}`. The shift removes the leading lattice correction and the
/// two-level combination the next one, leaving a bias far below the
/// statistical error at `steps ≥ 1000`.
pub fn mc_excursion_area(paths: u64, steps: u64, seed: u64) -> Result<ExcursionMcEstimate> {
    if paths < 1 || steps < 100 {
        return Err(Error::Precondition(format!(
            "mc_excursion_area needs paths >= 1 and steps >= 100, got {paths} and {steps}"
        )));
    }
    let m = steps / 2;
    let n = (2 * m) as f64;
    let (scale1, shift1) = (n.powf(-1.5), n.powf(-0.5));
    let (scale2, shift2) = ((2.0 * n).powf(-1.5), (2.0 * n).powf(-0.5));
    let chunks = paths.div_ceil(MC_CHUNK);
    let partial: Vec<[Welford; MC_MAX_MOMENT]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = [Welford::new(); MC_MAX_MOMENT];
            for path in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(paths) {
                let mut rng = rng::stream(seed, path);
                let a1 = dyck_area(m, &mut rng) as f64 * scale1 + shift1;
                let a2 = dyck_area(2 * m, &mut rng) as f64 * scale2 + shift2;
                let (mut p1, mut p2) = (1.0, 1.0);
                for w in acc.iter_mut() {
                    p1 *= a1;
                    p2 *= a2;
                    w.push(2.0 * p2 - p1);
                }
            }
            acc
        })
        .collect();
    let mut total = [Welford::new(); MC_MAX_MOMENT];
    for chunk in &partial {
        for (t, c) in total.iter_mut().zip(chunk) {
            t.merge(c);
        }
    }
    let mut moments = vec![1.0];
    let mut stderr = vec![0.0];
    moments.extend(total.iter().map(Welford::mean));
    stderr.extend(total.iter().map(Welford::stderr));
    Ok(ExcursionMcEstimate { paths, steps: 2 * m, seed, moments, stderr })
}
