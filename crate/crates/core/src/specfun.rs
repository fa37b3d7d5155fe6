//! Extended-precision gamma function and the closed-form upper bounds used to
//! truncate the series for the scaling moments at `λ = 0`.
//!
//! Extended precision values are binary floats ([`Real`]) whose precision is
//! fixed by a [`PrecisionSpec`]. The bound functions work in `f64` and round
//! their result outward so that they stay valid upper bounds.

use std::sync::OnceLock;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary extended-precision real number.
pub type Real = FBig<HalfEven, 2>;

const LOG2_10: f64 = std::f64::consts::LOG2_10;
const GUARD_BITS: usize = 64;
const MAX_STIRLING_TERMS: usize = 120;

/// Number of significant decimal digits requested from extended-precision
/// routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionSpec {
    digits: u32,
}

impl PrecisionSpec {
    pub const MIN_DIGITS: u32 = 15;
    pub const MAX_DIGITS: u32 = 200;

    pub fn new(digits: u32) -> Result<Self> {
        if !(Self::MIN_DIGITS..=Self::MAX_DIGITS).contains(&digits) {
            return Err(Error::Precondition(format!(
                "precision of {digits} digits outside supported range [{}, {}]",
                Self::MIN_DIGITS,
                Self::MAX_DIGITS
            )));
        }
        Ok(Self { digits })
    }

    pub fn digits(self) -> u32 {
        self.digits
    }

    /// Bits needed to represent `digits` decimal digits.
    pub fn bits(self) -> usize {
        (self.digits as f64 * LOG2_10).ceil() as usize
    }

    /// Bits carried during computation; the guard bits absorb accumulated
    /// rounding so that results meet [`Self::relative_tolerance`].
    pub fn working_bits(self) -> usize {
        self.bits() + GUARD_BITS
    }

    /// Relative error promised for every extended-precision result.
    pub fn relative_tolerance(self) -> f64 {
        10f64.powi(2 - self.digits as i32)
    }

    /// Unit roundoff of the working precision.
    pub fn unit_roundoff(self) -> f64 {
        2f64.powi(-(self.working_bits() as i32))
    }

    pub fn int(self, value: i64) -> Real {
        self.round(Real::from(value))
    }

    pub fn ubig(self, value: UBig) -> Real {
        self.round(Real::from(value))
    }

    pub fn ibig(self, value: IBig) -> Real {
        self.round(Real::from(value))
    }

    pub fn ratio(self, num: i64, den: i64) -> Real {
        self.int(num) / self.int(den)
    }

    pub fn rational(self, value: &RBig) -> Real {
        self.ibig(value.numerator().clone()) / self.ubig(value.denominator().clone())
    }

    pub fn pi(self) -> Real {
        Real::pi(self.working_bits())
    }

    /// Rounds `value` to the working precision.
    pub fn round(self, value: Real) -> Real {
        value.with_precision(self.working_bits()).value()
    }
}

impl Default for PrecisionSpec {
    fn default() -> Self {
        Self { digits: 30 }
    }
}

/// Converts an extended-precision value to the nearest `f64`.
pub fn to_f64(x: &Real) -> f64 {
    x.to_f64().value()
}

/// Formats `x` in decimal scientific notation with `digits` significant digits.
pub fn to_scientific(x: &Real, digits: usize) -> String {
    let decimal = x.clone().with_base_and_precision::<10>(digits).value();
    format!("{decimal:e}")
}

/// Formats `x` in positional decimal notation with `digits` significant digits.
pub fn to_decimal(x: &Real, digits: usize) -> String {
    let decimal = x.clone().with_base_and_precision::<10>(digits).value();
    format!("{decimal}")
}

/// Even-index Bernoulli numbers `B_0, B_2, B_4, ...` as exact rationals.
fn bernoulli_even() -> &'static [RBig] {
    static TABLE: OnceLock<Vec<RBig>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let top = 2 * (MAX_STIRLING_TERMS + 1);
        let mut all: Vec<RBig> = Vec::with_capacity(top + 1);
        all.push(RBig::ONE);
        for m in 1..=top {
            // B_m = -1/(m+1) * sum_{k<m} C(m+1, k) B_k
            let mut binom = UBig::ONE;
            let mut acc = RBig::ZERO;
            for (k, b) in all.iter().enumerate() {
                acc += RBig::from(IBig::from(binom.clone())) * b;
                binom = binom * UBig::from(m + 1 - k) / UBig::from(k + 1);
            }
            all.push(-acc / RBig::from(IBig::from(m + 1)));
        }
        all.into_iter().step_by(2).collect()
    })
}

/// `ln |B_{2m}|` for `m >= 1`, used to plan the Stirling truncation.
fn ln_abs_bernoulli_even() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let prec = PrecisionSpec::new(20).expect("valid precision");
        bernoulli_even()
            .iter()
            .map(|b| {
                if *b == RBig::ZERO {
                    f64::NEG_INFINITY
                } else {
                    let abs = prec.rational(b);
                    let abs = if abs < Real::ZERO { -abs } else { abs };
                    to_f64(&abs.ln())
                }
            })
            .collect()
    })
}

/// Picks an upward shift `s` and a number of Stirling terms `m` such that the
/// first omitted term at `x + s` is below `2^-(bits + 8)`.
fn stirling_plan(x: f64, bits: usize) -> (u64, usize) {
    let target = -((bits + 8) as f64) * std::f64::consts::LN_2;
    let ln_b = ln_abs_bernoulli_even();
    let mut shift = 0u64;
    loop {
        let z = x + shift as f64;
        let ln_z = z.ln();
        let mut previous = f64::INFINITY;
        for terms in 1..=MAX_STIRLING_TERMS {
            let m = (terms + 1) as f64;
            let bound = ln_b[terms + 1] - (2.0 * m * (2.0 * m - 1.0)).ln() - (2.0 * m - 1.0) * ln_z;
            if bound < target {
                return (shift, terms);
            }
            if bound > previous {
                break;
            }
            previous = bound;
        }
        shift += 1;
    }
}

/// Stirling series for `ln Γ(z)` with `terms` Bernoulli corrections.
fn ln_gamma_stirling(z: &Real, terms: usize, prec: PrecisionSpec) -> Real {
    let half = prec.ratio(1, 2);
    let two_pi = prec.pi() * prec.int(2);
    let mut sum = (z.clone() - &half) * z.ln() - z + two_pi.ln() * &half;
    let z_sq = z.clone() * z;
    let mut z_pow = z.clone();
    let bernoulli = bernoulli_even();
    for m in 1..=terms {
        let denom = (2 * m * (2 * m - 1)) as i64;
        sum += prec.rational(&bernoulli[m]) / (prec.int(denom) * &z_pow);
        z_pow *= &z_sq;
    }
    sum
}

/// Gamma function for positive arguments, with relative error below
/// `prec.relative_tolerance()`.
///
/// The argument is shifted upward until the truncated Stirling series has a
/// remainder below the working precision; the shift is then undone with the
/// recurrence `Γ(x+1) = xΓ(x)`.
pub fn gamma(x: &Real, prec: PrecisionSpec) -> Result<Real> {
    let x = prec.round(x.clone());
    if x <= Real::ZERO {
        return Err(Error::Domain(format!(
            "gamma requires a positive argument, got {}",
            to_f64(&x)
        )));
    }
    let (shift, terms) = stirling_plan(to_f64(&x), prec.working_bits());
    let shifted = x.clone() + prec.int(shift as i64);
    let mut product = prec.int(1);
    for i in 0..shift {
        product *= x.clone() + prec.int(i as i64);
    }
    Ok(ln_gamma_stirling(&shifted, terms, prec).exp() / product)
}

/// `Γ(j/6)` for positive integers `j`, built from the six base values
/// `Γ(1/6), …, Γ(1)` and the recurrence.
#[derive(Debug, Clone)]
pub struct GammaSixths {
    prec: PrecisionSpec,
    base: Vec<Real>,
}

impl GammaSixths {
    pub fn new(prec: PrecisionSpec) -> Result<Self> {
        let mut base = Vec::with_capacity(6);
        for r in 1..=6 {
            let value = match r {
                3 => prec.pi().sqrt(),
                6 => prec.int(1),
                _ => gamma(&prec.ratio(r, 6), prec)?,
            };
            base.push(value);
        }
        Ok(Self { prec, base })
    }

    pub fn precision(&self) -> PrecisionSpec {
        self.prec
    }

    /// `Γ(sixths / 6)`.
    pub fn gamma(&self, sixths: u32) -> Result<Real> {
        if sixths == 0 {
            return Err(Error::Domain("gamma has a pole at 0".into()));
        }
        let q = (sixths - 1) / 6;
        let r = sixths - 6 * q;
        let mut numer = UBig::ONE;
        for i in 0..q {
            numer *= UBig::from(r + 6 * i);
        }
        let denom = UBig::from(6u8).pow(q as usize);
        Ok(self.base[(r - 1) as usize].clone() * self.prec.ubig(numer) / self.prec.ubig(denom))
    }
}

/// Natural logarithm of the gamma function in double precision.
pub fn ln_gamma_f64(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Nudges a computed upper bound toward `+∞` so that rounding in the handful
/// of `exp`/`ln` evaluations behind it cannot make it too small.
fn round_up(x: f64) -> f64 {
    if x.is_finite() {
        (x * (1.0 + 16.0 * f64::EPSILON)).next_up()
    } else {
        x
    }
}

/// Semifactorial `m!! = m (m-2) (m-4) … 1` for odd `m`, with `(-1)!! = 1`.
pub fn semifactorial(m: i64) -> Result<u128> {
    if m < -1 || m % 2 == 0 {
        return Err(Error::Domain(format!(
            "semifactorial is defined for odd m >= -1, got {m}"
        )));
    }
    let mut acc: u128 = 1;
    let mut j = 1i64;
    while j <= m {
        acc = acc
            .checked_mul(j as u128)
            .ok_or_else(|| Error::Domain(format!("{m}!! overflows 128 bits")))?;
        j += 2;
    }
    Ok(acc)
}

/// Upper bound `5 ℓ₀^s 2^(-ℓ₀)` for the tail `Σ_{ℓ>ℓ₀} ℓ^s 2^(-ℓ)`.
pub fn tail_geometric_bound(s: f64, ell0: u64) -> Result<f64> {
    if !(s >= 0.0) || (ell0 as f64) < 2.0 * s {
        return Err(Error::Precondition(format!(
            "tail bound needs s >= 0 and ell0 >= 2s, got s = {s}, ell0 = {ell0}"
        )));
    }
    let ell0 = ell0 as f64;
    let ln = 5f64.ln() + s * ell0.ln() - ell0 * std::f64::consts::LN_2;
    Ok(round_up(ln.exp()))
}

/// Logarithm of [`ikl_upper`].
pub fn ln_ikl_upper(k: u32, ell: u32) -> Result<f64> {
    if k < 2 || ell < 1 {
        return Err(Error::Precondition(format!(
            "I_(k,l) bound needs k >= 2 and l >= 1, got k = {k}, l = {ell}"
        )));
    }
    let (k, ell) = (k as f64, ell as f64);
    let three_ell = 3.0 * ell;
    Ok((4.0 * std::f64::consts::PI).sqrt().ln()
        + (k / 3.0 - 1.0) * three_ell.ln()
        + 0.5 * ell * (three_ell.ln() - 1.0)
        + 2.0 * k * k / (9.0 * ell))
}

/// Upper bound `2√π (3ℓ)^(k/3-1) (3ℓ/e)^(ℓ/2) e^(2k²/9ℓ)` on `I_{k,ℓ}`.
pub fn ikl_upper(k: u32, ell: u32) -> Result<f64> {
    Ok(round_up(ln_ikl_upper(k, ell)?.exp()))
}

/// Logarithm of [`wl_upper`].
pub fn ln_wl_upper(ell: u32) -> Result<f64> {
    if ell < 1 {
        return Err(Error::Precondition("w_l bound needs l >= 1".into()));
    }
    let ell = ell as f64;
    Ok(8f64.ln() - 0.5 * std::f64::consts::PI.ln() + 0.5 * ell.ln()
        + 0.5 * ell * (1.0 - (12.0 * ell).ln()))
}

/// Upper bound `8 π^(-1/2) √ℓ (e/12ℓ)^(ℓ/2)` on Wright's constant `w_ℓ`.
pub fn wl_upper(ell: u32) -> Result<f64> {
    Ok(round_up(ln_wl_upper(ell)?.exp()))
}

/// Rigorous bound `11 e^(2k²/9ℓ₀) 3^(k/3) ℓ₀^(k/3-1/2) 2^(-ℓ₀)` on the part of
/// the `λ = 0` moment series beyond index `ℓ₀`.
pub fn series_tail_bound(k: u32, ell0: u32) -> Result<f64> {
    if k < 2 || ell0 < 1 || 3 * ell0 + 3 < 2 * k {
        return Err(Error::Precondition(format!(
            "series tail bound needs k >= 2 and ell0 >= 2k/3 - 1, got k = {k}, ell0 = {ell0}"
        )));
    }
    let (k, l0) = (k as f64, ell0 as f64);
    let ln = 11f64.ln() + 2.0 * k * k / (9.0 * l0) + (k / 3.0) * 3f64.ln()
        + (k / 3.0 - 0.5) * l0.ln()
        - l0 * std::f64::consts::LN_2;
    Ok(round_up(ln.exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prec() -> PrecisionSpec {
        PrecisionSpec::default()
    }

    fn rel(a: &Real, b: &Real) -> f64 {
        to_f64(&((a.clone() - b) / b)).abs()
    }

    #[test]
    fn precision_range_is_enforced() {
        assert!(PrecisionSpec::new(14).is_err());
        assert!(PrecisionSpec::new(201).is_err());
        assert_eq!(PrecisionSpec::new(40).unwrap().digits(), 40);
    }

    #[test]
    fn bernoulli_numbers_match_known_values() {
        let b = bernoulli_even();
        assert_eq!(b[1], RBig::from_parts(IBig::from(1), UBig::from(6u8)));
        assert_eq!(b[2], RBig::from_parts(IBig::from(-1), UBig::from(30u8)));
        assert_eq!(b[6], RBig::from_parts(IBig::from(-691), UBig::from(2730u32)));
    }

    #[test]
    fn gamma_at_one_and_half() {
        let p = prec();
        let one = gamma(&p.int(1), p).unwrap();
        assert!(rel(&one, &p.int(1)) < p.relative_tolerance());
        let half = gamma(&p.ratio(1, 2), p).unwrap();
        assert!(rel(&half, &p.pi().sqrt()) < p.relative_tolerance());
        assert!((to_f64(&half) - 1.772453850905516).abs() < 1e-15);
    }

    #[test]
    fn gamma_two_thirds_matches_quadrature_oracle() {
        // ∫_0^∞ x^{-1/3} e^{-x} dx by adaptive quadrature
        let p = prec();
        let g = to_f64(&gamma(&p.ratio(2, 3), p).unwrap());
        assert!((g - 1.354117939426400).abs() < 1e-14);
    }

    #[test]
    fn gamma_rejects_non_positive() {
        let p = prec();
        assert!(matches!(gamma(&p.int(0), p), Err(Error::Domain(_))));
        assert!(matches!(gamma(&p.int(-3), p), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_recurrence_on_sixths() {
        let p = prec();
        let tol = 10f64.powi(3 - p.digits() as i32);
        for j in 1..=30 {
            let x = p.ratio(j, 6);
            let lhs = gamma(&(x.clone() + p.int(1)), p).unwrap();
            let rhs = x.clone() * gamma(&x, p).unwrap();
            assert!(rel(&lhs, &rhs) < tol, "j = {j}");
        }
    }

    #[test]
    fn gamma_reflection() {
        let p = prec();
        let tol = 10f64.powi(3 - p.digits() as i32);
        // sin(π/6) = 1/2, sin(π/3) = √3/2
        let cases = [
            (p.ratio(1, 6), p.ratio(1, 2)),
            (p.ratio(1, 3), p.int(3).sqrt() / p.int(2)),
        ];
        for (x, sin) in cases {
            let lhs = gamma(&x, p).unwrap() * gamma(&(p.int(1) - &x), p).unwrap();
            let rhs = p.pi() / sin;
            assert!(rel(&lhs, &rhs) < tol, "x = {}", to_f64(&x));
        }
    }

    #[test]
    fn sixths_table_agrees_with_direct_gamma() {
        let p = prec();
        let table = GammaSixths::new(p).unwrap();
        for j in [1u32, 2, 4, 5, 7, 13, 40, 239] {
            let direct = gamma(&p.ratio(j as i64, 6), p).unwrap();
            assert!(rel(&table.gamma(j).unwrap(), &direct) < p.relative_tolerance(), "j = {j}");
        }
    }

    #[test]
    fn high_precision_gamma_third() {
        // Γ(1/3) to 40 digits
        let p = PrecisionSpec::new(45).unwrap();
        let g = gamma(&p.ratio(1, 3), p).unwrap();
        assert_eq!(to_decimal(&g, 40), "2.678938534707747633655692940974677644129");
    }

    #[test]
    fn semifactorial_values() {
        assert_eq!(semifactorial(-1).unwrap(), 1);
        assert_eq!(semifactorial(1).unwrap(), 1);
        assert_eq!(semifactorial(5).unwrap(), 15);
        assert_eq!(semifactorial(3).unwrap(), 3);
        assert!(semifactorial(4).is_err());
        assert!(semifactorial(-3).is_err());
    }

    #[test]
    fn tail_geometric_examples() {
        let b = tail_geometric_bound(0.0, 2).unwrap();
        assert!((b - 1.25).abs() < 1e-14);
        assert!(0.25 <= b);
        assert!((tail_geometric_bound(1.0, 4).unwrap() - 1.25).abs() < 1e-14);
        assert!(tail_geometric_bound(2.0, 3).is_err());
    }

    #[test]
    fn tail_geometric_dominates_partial_tails() {
        for &(s, ell0) in &[(0.0, 2u64), (1.0, 4), (11.0 / 6.0, 75), (0.5, 1), (3.0, 6), (2.5, 40)] {
            let tail: f64 = ((ell0 + 1)..=500).map(|l| (l as f64).powf(s) * 2f64.powi(-(l as i32))).sum();
            assert!(tail <= tail_geometric_bound(s, ell0).unwrap(), "s = {s}, ell0 = {ell0}");
        }
    }

    #[test]
    fn ikl_upper_instantiation() {
        let expected = 2.0 * std::f64::consts::PI.sqrt()
            * 3f64.powf(-1.0 / 3.0)
            * (3.0 / std::f64::consts::E).sqrt()
            * (8.0f64 / 9.0).exp();
        let got = ikl_upper(2, 1).unwrap();
        assert!(got >= expected && (got - expected) / expected < 1e-13);
    }

    #[test]
    fn wl_upper_values() {
        let w1 = wl_upper(1).unwrap();
        assert!((w1 - 2.148).abs() < 1e-3, "{w1}");
        assert!(wl_upper(10).unwrap() > wl_upper(20).unwrap());
        assert!(wl_upper(0).is_err());
    }

    #[test]
    fn series_tail_examples() {
        let b2 = series_tail_bound(2, 75).unwrap();
        assert!((b2 / 1.26e-21 - 1.0).abs() < 0.01, "{b2:e}");
        assert!(series_tail_bound(6, 75).unwrap() < 1e-17);
        for k in 2..=6 {
            let (a, b, c) = (
                series_tail_bound(k, 40).unwrap(),
                series_tail_bound(k, 60).unwrap(),
                series_tail_bound(k, 80).unwrap(),
            );
            assert!(a > b && b > c);
        }
        assert!(series_tail_bound(6, 2).is_err());
        assert!(series_tail_bound(1, 10).is_err());
    }

    #[test]
    fn series_tail_dominates_termwise_bounds() {
        let c = (2.0 * std::f64::consts::PI).sqrt().ln();
        for k in 2..=6 {
            for ell0 in [40u32, 75] {
                let tail: f64 = ((ell0 + 1)..=500)
                    .map(|l| (ln_wl_upper(l).unwrap() + ln_ikl_upper(k, l).unwrap() - c).exp())
                    .sum();
                assert!(tail <= series_tail_bound(k, ell0).unwrap(), "k = {k}, ell0 = {ell0}");
            }
        }
    }
}
