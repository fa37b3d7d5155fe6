//! Monte Carlo sampling of `G(n, p)` component structure and the
//! susceptibility estimators built on it.

use dashu_int::UBig;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::stats::{covariance, Welford};

/// Largest expected edge count a single sample may request.
pub const MAX_EXPECTED_EDGES: f64 = 2e8;
/// Largest supported vertex count.
pub const MAX_VERTICES: u64 = u32::MAX as u64;

/// Component sizes of one sample and their exact power sums.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentStats {
    pub n: u64,
    pub p: f64,
    pub seed: u64,
    /// Component sizes in descending order.
    pub sizes: Vec<u32>,
    /// `s_k = Σ_i |C_i|^k` for `k = 1..=6` (index `k - 1`).
    pub power_sums: Vec<UBig>,
}

impl ComponentStats {
    fn from_sizes(n: u64, p: f64, seed: u64, mut sizes: Vec<u32>) -> Self {
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let mut power_sums = vec![UBig::ZERO; 6];
        let mut i = 0;
        while i < sizes.len() {
            let size = sizes[i];
            let mut j = i;
            while j < sizes.len() && sizes[j] == size {
                j += 1;
            }
            let count = UBig::from((j - i) as u64);
            let mut pow = UBig::ONE;
            for s in power_sums.iter_mut() {
                pow *= UBig::from(size);
                *s += &count * &pow;
            }
            i = j;
        }
        Self { n, p, seed, sizes, power_sums }
    }

    /// `s_k` for `1 ≤ k ≤ 6`.
    pub fn s(&self, k: usize) -> &UBig {
        &self.power_sums[k - 1]
    }

    /// `Σ_{i≠j} |C_i|²|C_j|² = s_2² - s_4`.
    pub fn pair_product(&self) -> UBig {
        self.s(2) * self.s(2) - self.s(4)
    }

    pub fn functionals(&self) -> SampleFunctionals {
        let n = self.n as f64;
        let x = (2..=6)
            .map(|k| ubig_to_f64(self.s(k)) / n.powf(2.0 * k as f64 / 3.0))
            .collect();
        let threshold = two_large_threshold(self.n);
        SampleFunctionals {
            x,
            pair_product: ubig_to_f64(&self.pair_product()) / n.powf(8.0 / 3.0),
            two_large: self.sizes.len() >= 2 && self.sizes[1] as u64 >= threshold,
        }
    }
}

fn ubig_to_f64(x: &UBig) -> f64 {
    x.to_f64().value()
}

/// Rescaled per-sample quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFunctionals {
    /// `X_k = s_k / n^{2k/3}` for `k = 2..=6` (index `k - 2`).
    pub x: Vec<f64>,
    /// `(s_2² - s_4) / n^{8/3}`.
    pub pair_product: f64,
    /// Whether the second largest component has at least `⌈n^{2/3}⌉` vertices.
    pub two_large: bool,
}

impl SampleFunctionals {
    pub fn xk(&self, k: usize) -> f64 {
        self.x[k - 2]
    }
}

/// Smallest integer `t` with `t³ ≥ n²`, i.e. `⌈n^{2/3}⌉`.
pub fn two_large_threshold(n: u64) -> u64 {
    let target = (n as u128) * (n as u128);
    let mut t = (n as f64).powf(2.0 / 3.0).round() as u128;
    while t > 0 && (t - 1).pow(3) >= target {
        t -= 1;
    }
    while t.pow(3) < target {
        t += 1;
    }
    t as u64
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut v: u32) -> u32 {
        while self.parent[v as usize] != v {
            let grand = self.parent[self.parent[v as usize] as usize];
            self.parent[v as usize] = grand;
            v = grand;
        }
        v
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
    }

    fn component_sizes(&self) -> Vec<u32> {
        (0..self.parent.len())
            .filter(|&v| self.parent[v] == v as u32)
            .map(|v| self.size[v])
            .collect()
    }
}

fn check_params(n: u64, p: f64) -> Result<()> {
    if !(1..=MAX_VERTICES).contains(&n) {
        return Err(Error::Precondition(format!("n must lie in [1, {MAX_VERTICES}], got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("edge probability must lie in [0, 1], got {p}")));
    }
    let expected = p * n as f64 * (n as f64 - 1.0) / 2.0;
    if expected > MAX_EXPECTED_EDGES {
        return Err(Error::Budget(format!(
            "G({n}, {p}) has about {expected:.3e} edges, above the limit of {MAX_EXPECTED_EDGES:e}"
        )));
    }
    Ok(())
}

/// Calls `visit(v, w)` for every edge of one `G(n, p)` draw, skipping over
/// absent edges with geometric jumps along the order
/// `(1,0), (2,0), (2,1), (3,0), …`.
fn for_each_edge(n: u64, p: f64, rng: &mut StreamRng, mut visit: impl FnMut(u32, u32)) {
    if p <= 0.0 || n < 2 {
        return;
    }
    let ln_q = (-p).ln_1p();
    let (mut v, mut w) = (1u64, -1i64);
    loop {
        let skip = if p >= 1.0 { 0.0 } else { (rng::uniform_open0(rng).ln() / ln_q).floor() };
        if skip >= n as f64 * n as f64 {
            return;
        }
        w += 1 + skip as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v >= n {
            return;
        }
        visit(v as u32, w as u32);
    }
}

fn sample_with(n: u64, p: f64, seed: u64, rng: &mut StreamRng) -> ComponentStats {
    let mut uf = UnionFind::new(n as usize);
    for_each_edge(n, p, rng, |v, w| uf.union(v, w));
    ComponentStats::from_sizes(n, p, seed, uf.component_sizes())
}

/// Component statistics of one `G(n, p)` draw from stream 0 of `seed`.
pub fn sample_gnp_components(n: u64, p: f64, seed: u64) -> Result<ComponentStats> {
    check_params(n, p)?;
    Ok(sample_with(n, p, seed, &mut rng::stream(seed, 0)))
}

/// One coupled draw at every `p` of an ascending list.
///
/// Edges are drawn at `p_max`, each with an independent label
/// `V ~ U[0, p_max]`; the graph at `p` keeps the edges with `V ≤ p`. Each
/// marginal is exactly `G(n, p)` and the graphs are nested.
pub fn coupled_sample(n: u64, p_list: &[f64], seed: u64) -> Result<Vec<ComponentStats>> {
    let Some(&p_max) = p_list.last() else {
        return Ok(Vec::new());
    };
    if p_list.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Precondition("p_list must be ascending".into()));
    }
    check_params(n, p_max)?;
    check_params(n, p_list[0])?;
    let mut rng = rng::stream(seed, 0);
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for_each_edge(n, p_max, &mut rng, |v, w| edges.push((v, w)));
    let mut labelled: Vec<(f64, u32, u32)> = edges
        .into_iter()
        .map(|(v, w)| (rng::uniform(&mut rng) * p_max, v, w))
        .collect();
    labelled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut uf = UnionFind::new(n as usize);
    let mut next = 0;
    let mut out = Vec::with_capacity(p_list.len());
    for &p in p_list {
        while next < labelled.len() && labelled[next].0 <= p {
            uf.union(labelled[next].1, labelled[next].2);
            next += 1;
        }
        out.push(ComponentStats::from_sizes(n, p, seed, uf.component_sizes()));
    }
    Ok(out)
}

/// `p = 1/n + λ n^{-4/3}`, checked to lie in `(0, 1)`.
pub fn window_p(n: u64, lambda: f64) -> Result<f64> {
    let nf = n as f64;
    let p = 1.0 / nf + lambda * nf.powf(-4.0 / 3.0);
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "n = {n}, lambda = {lambda} gives p = {p}, outside (0, 1)"
        )));
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub name: String,
    pub n: u64,
    pub lambda: f64,
    pub p: f64,
    pub replicates: u64,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
}

/// Estimands computed from the per-replicate functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimand {
    /// Mean of `X_2`, estimating `χ(p)/n^{1/3}`.
    X2,
    /// Ratio estimator of `n^{-4/3} d/dp log χ(p)`.
    DlogChi,
    /// `𝔇E[X_2] = E[X_2²] - E[X_4]`.
    D1,
    /// `𝔇²E[X_2] = 2E[X_2³] - 6E[X_4 X_2] - E[X_3²] + 5E[X_6]`.
    D2,
    /// Frequency of two components of size at least `⌈n^{2/3}⌉`.
    TwoLarge,
}

impl Estimand {
    pub const ALL: [Estimand; 5] = [Self::X2, Self::DlogChi, Self::D1, Self::D2, Self::TwoLarge];

    pub fn name(self) -> &'static str {
        match self {
            Self::X2 => "x2",
            Self::DlogChi => "dlogchi",
            Self::D1 => "d1",
            Self::D2 => "d2",
            Self::TwoLarge => "twolarge",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

/// Per-replicate functionals for `replicates` independent draws of `G(n, p)`;
/// replicate `r` uses stream `r` of `seed`.
pub fn replicate_functionals(n: u64, p: f64, replicates: u64, seed: u64) -> Result<Vec<SampleFunctionals>> {
    check_params(n, p)?;
    Ok((0..replicates)
        .into_par_iter()
        .map(|r| sample_with(n, p, seed, &mut rng::stream(seed, r)).functionals())
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn summary(name: &str, n: u64, lambda: f64, p: f64, seed: u64, reps: u64, mean: f64, stderr: f64) -> EstimatorSummary {
    EstimatorSummary {
        name: name.to_string(),
        n,
        lambda,
        p,
        replicates: reps,
        seed,
        mean,
        stderr,
        ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr),
    }
}

/// Reduces functionals to one estimator summary. The reduction runs in
/// replicate order, so results do not depend on the number of workers.
pub fn summarize(
    estimand: Estimand,
    samples: &[SampleFunctionals],
    n: u64,
    lambda: f64,
    p: f64,
    seed: u64,
) -> EstimatorSummary {
    let reps = samples.len() as u64;
    let mean_of = |f: &dyn Fn(&SampleFunctionals) -> f64| {
        let mut w = Welford::new();
        samples.iter().for_each(|s| w.push(f(s)));
        w
    };
    let plain = |w: Welford| summary(estimand.name(), n, lambda, p, seed, reps, w.mean(), w.stderr());
    match estimand {
        Estimand::X2 => plain(mean_of(&|s| s.xk(2))),
        Estimand::D1 => plain(mean_of(&|s| s.xk(2) * s.xk(2) - s.xk(4))),
        Estimand::D2 => plain(mean_of(&|s| {
            let (x2, x3, x4, x6) = (s.xk(2), s.xk(3), s.xk(4), s.xk(6));
            2.0 * x2 * x2 * x2 - 6.0 * x4 * x2 - x3 * x3 + 5.0 * x6
        })),
        Estimand::TwoLarge => plain(mean_of(&|s| if s.two_large { 1.0 } else { 0.0 })),
        Estimand::DlogChi => {
            let ys: Vec<f64> = samples.iter().map(|s| s.pair_product / (1.0 - p)).collect();
            let xs: Vec<f64> = samples.iter().map(|s| s.xk(2)).collect();
            let count = reps as f64;
            let my = ys.iter().sum::<f64>() / count;
            let mx = xs.iter().sum::<f64>() / count;
            let ratio = my / mx;
            // delta method for a ratio of means
            let var = (covariance(&ys, &ys) - 2.0 * ratio * covariance(&ys, &xs)
                + ratio * ratio * covariance(&xs, &xs))
                / (count * mx * mx);
            summary(estimand.name(), n, lambda, p, seed, reps, ratio, var.max(0.0).sqrt())
        }
    }
}

/// All requested estimators from one shared set of replicates.
pub fn estimate(
    estimands: &[Estimand],
    n: u64,
    lambda: f64,
    replicates: u64,
    seed: u64,
) -> Result<Vec<EstimatorSummary>> {
    if replicates < 1 {
        return Err(Error::Precondition("need at least one replicate".into()));
    }
    let p = window_p(n, lambda)?;
    let samples = replicate_functionals(n, p, replicates, seed)?;
    Ok(estimands.iter().map(|&e| summarize(e, &samples, n, lambda, p, seed)).collect())
}

fn single(e: Estimand, n: u64, lambda: f64, replicates: u64, seed: u64) -> Result<EstimatorSummary> {
    Ok(estimate(&[e], n, lambda, replicates, seed)?.remove(0))
}

/// Mean of `X_2 = s_2 / n^{4/3}`, estimating `χ(p) / n^{1/3}`.
pub fn estimate_susceptibility(n: u64, lambda: f64, replicates: u64, seed: u64) -> Result<EstimatorSummary> {
    single(Estimand::X2, n, lambda, replicates, seed)
}

/// `mean((s_2² - s_4)/((1-p) n^{8/3})) / mean(s_2/n^{4/3})`.
pub fn estimate_log_derivative(n: u64, lambda: f64, replicates: u64, seed: u64) -> Result<EstimatorSummary> {
    single(Estimand::DlogChi, n, lambda, replicates, seed)
}

/// Estimates of `𝔇E[X_2]` and `𝔇²E[X_2]` from the same replicates.
pub fn estimate_derivative_moments(
    n: u64,
    lambda: f64,
    replicates: u64,
    seed: u64,
) -> Result<Vec<EstimatorSummary>> {
    estimate(&[Estimand::D1, Estimand::D2], n, lambda, replicates, seed)
}

/// Frequency of the event that two components reach `⌈n^{2/3}⌉` vertices.
pub fn two_large_components_freq(n: u64, lambda: f64, replicates: u64, seed: u64) -> Result<EstimatorSummary> {
    single(Estimand::TwoLarge, n, lambda, replicates, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_and_complete_graphs() {
        let empty = sample_gnp_components(50, 0.0, 1).unwrap();
        assert_eq!(empty.sizes.len(), 50);
        assert_eq!(*empty.s(2), UBig::from(50u8));
        let full = sample_gnp_components(50, 1.0, 1).unwrap();
        assert_eq!(full.sizes, vec![50]);
        assert_eq!(*full.s(2), UBig::from(2500u32));
        assert_eq!(*full.s(6), UBig::from(50u64.pow(6)));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(sample_gnp_components(10, 1.5, 0), Err(Error::Domain(_))));
        assert!(matches!(sample_gnp_components(1_000_000, 1.0, 0), Err(Error::Budget(_))));
        assert!(matches!(window_p(10, -100.0), Err(Error::Domain(_))));
    }

    #[test]
    fn threshold_is_ceiling_of_two_thirds_power() {
        assert_eq!(two_large_threshold(1_000_000), 10_000);
        assert_eq!(two_large_threshold(1_000), 100);
        assert_eq!(two_large_threshold(2), 2);
        assert_eq!(two_large_threshold(100_000), 2155);
    }

    #[test]
    fn edge_count_matches_binomial_mean() {
        let (n, p) = (400u64, 0.01);
        let mut total = 0u64;
        for seed in 0..200 {
            let mut count = 0;
            for_each_edge(n, p, &mut rng::stream(seed, 0), |v, w| {
                assert!(w < v && (v as u64) < n);
                count += 1;
            });
            total += count;
        }
        let mean = total as f64 / 200.0;
        let expected = p * (n * (n - 1) / 2) as f64;
        let sd = (expected * (1.0 - p) / 200.0).sqrt();
        assert!((mean - expected).abs() < 4.0 * sd, "mean {mean}, expected {expected}");
    }

    #[test]
    fn large_power_sums_are_exact() {
        let stats = ComponentStats::from_sizes(10_000_000, 1.0, 0, vec![10_000_000]);
        let expected = UBig::from(10u8).pow(42);
        assert_eq!(*stats.s(6), expected);
    }

    #[test]
    fn degenerate_coupling_repeats() {
        let out = coupled_sample(2000, &[0.0005, 0.0005], 3).unwrap();
        assert_eq!(out[0], out[1]);
    }

    #[test]
    fn estimators_are_deterministic() {
        let a = estimate(&Estimand::ALL, 2000, 0.0, 20, 11).unwrap();
        let b = estimate(&Estimand::ALL, 2000, 0.0, 20, 11).unwrap();
        assert_eq!(a, b);
        for s in &a {
            assert!(s.stderr >= 0.0);
            assert!((s.ci95.0 - (s.mean - 1.96 * s.stderr)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_vertex_log_derivative_is_exact() {
        // One possible edge: pair_product = 2 if absent, 0 otherwise, so the
        // numerator (s_2² - s_4)/(1-p) has mean 2 whatever p is.
        let p = 0.3;
        let samples = replicate_functionals(2, p, 4000, 5).unwrap();
        let n83 = 2f64.powf(8.0 / 3.0);
        let mut w = Welford::new();
        samples.iter().for_each(|s| w.push(s.pair_product * n83 / (1.0 - p)));
        assert!((w.mean() - 2.0).abs() < 4.0 * w.stderr() + 1e-12);
    }

    #[test]
    fn pair_product_identity() {
        let stats = sample_gnp_components(3000, 1.0 / 3000.0, 8).unwrap();
        let direct: UBig = {
            let sq: Vec<UBig> = stats.sizes.iter().map(|&c| UBig::from(c as u64 * c as u64)).collect();
            let total: UBig = sq.iter().sum();
            sq.iter().map(|x| x * (&total - x)).sum()
        };
        assert_eq!(direct, stats.pair_product());
        assert_eq!(*stats.s(1), UBig::from(3000u32));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn sample_invariants(n in 1u64..400, p in 0.0f64..0.05, seed in 0u64..1000) {
            let s = sample_gnp_components(n, p, seed).unwrap();
            prop_assert_eq!(s.s(1).clone(), UBig::from(n));
            prop_assert!(s.sizes.windows(2).all(|w| w[0] >= w[1]));
            let f = s.functionals();
            prop_assert!(f.x.iter().all(|&x| x > 0.0));
            prop_assert!(f.pair_product >= 0.0);
        }

        #[test]
        fn coupling_is_monotone(seed in 0u64..200) {
            let ps = [0.0002, 0.0005, 0.001, 0.002];
            let out = coupled_sample(2000, &ps, seed).unwrap();
            for w in out.windows(2) {
                for k in 1..=6 {
                    prop_assert!(w[0].s(k) <= w[1].s(k));
                }
            }
        }
    }
}
