//! Exact and closed-form references: exhaustive enumeration of small
//! `G(n, p)`, percolation on the cycle, Poisson branching processes and the
//! susceptibility and tree–graph inequalities.

use dashu_int::IBig;
use dashu_ratio::RBig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::percolation;
use crate::specfun;
use crate::stats::Welford;

/// Polynomial with integer coefficients in the power basis, lowest degree
/// first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly(pub Vec<i128>);

impl Poly {
    fn zero(degree: usize) -> Self {
        Poly(vec![0; degree + 1])
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0]);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(i, c)| c * i as i128).collect()).trimmed()
    }

    /// `(1 - p) · self`.
    pub fn times_one_minus_p(&self) -> Poly {
        let mut out = vec![0; self.0.len() + 1];
        for (i, c) in self.0.iter().enumerate() {
            out[i] += c;
            out[i + 1] -= c;
        }
        Poly(out).trimmed()
    }

    pub fn scaled(&self, factor: i128) -> Poly {
        Poly(self.0.iter().map(|c| c * factor).collect())
    }

    fn trimmed(mut self) -> Poly {
        while self.0.len() > 1 && *self.0.last().unwrap() == 0 {
            self.0.pop();
        }
        self
    }

    pub fn eval(&self, p: &RBig) -> RBig {
        self.0.iter().rev().fold(RBig::ZERO, |acc, c| acc * p + RBig::from(IBig::from(*c)))
    }

    pub fn eval_f64(&self, p: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * p + *c as f64)
    }
}

fn binomial(n: usize, k: usize) -> i128 {
    (0..k).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
}

/// Components of the graph on `n` vertices whose edges are the set bits of
/// `mask` over `edges`. Returns the component label of each vertex.
fn labels(n: usize, edges: &[(usize, usize)], mask: u32) -> Vec<usize> {
    let mut label: Vec<usize> = (0..n).collect();
    let root = |label: &Vec<usize>, mut v: usize| {
        while label[v] != v {
            v = label[v];
        }
        v
    };
    for (e, &(a, b)) in edges.iter().enumerate() {
        if mask >> e & 1 == 1 {
            let (ra, rb) = (root(&label, a), root(&label, b));
            if ra != rb {
                label[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    (0..n).map(|v| root(&label, v)).collect()
}

fn component_sizes(label: &[usize]) -> Vec<u64> {
    let mut sizes = vec![0u64; label.len()];
    for &l in label {
        sizes[l] += 1;
    }
    sizes.into_iter().filter(|&s| s > 0).collect()
}

fn complete_edges(n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            edges.push((a, b));
        }
    }
    edges
}

/// Expectations over `G(n, p)`, `n ≤ 5`, as exact polynomials in `p`.
#[derive(Debug, Clone)]
pub struct GnpPolynomials {
    pub n: usize,
    /// `E[s_k]` for `k = 1..=6` (index `k - 1`).
    pub s: Vec<Poly>,
    pub s2_sq: Poly,
    pub s4_s2: Poly,
    pub s2_cube: Poly,
    pub s3_sq: Poly,
    /// `E[s_2² - s_4]`.
    pub pair_product: Poly,
    /// `E|C(v)|^k` for a fixed vertex and `k = 1..=3` (index `k - 1`).
    pub cluster: Vec<Poly>,
}

impl GnpPolynomials {
    /// Sums every quantity over all `2^C(n,2)` edge sets, grouped by edge
    /// count `m`, then expands `Σ_m A_m p^m (1-p)^{M-m}` in powers of `p`.
    pub fn enumerate(n: usize) -> Result<Self> {
        if !(1..=5).contains(&n) {
            return Err(Error::Precondition(format!("exhaustive enumeration needs 1 <= n <= 5, got {n}")));
        }
        let edges = complete_edges(n);
        let m_total = edges.len();
        const QUANTITIES: usize = 6 + 5 + 3;
        let mut by_edges = vec![[0i128; QUANTITIES]; m_total + 1];
        for mask in 0u32..(1 << m_total) {
            let label = labels(n, &edges, mask);
            let sizes = component_sizes(&label);
            let s: Vec<i128> = (1..=6u32).map(|k| sizes.iter().map(|&c| (c as i128).pow(k)).sum()).collect();
            let c0 = label.iter().filter(|&&l| l == label[0]).count() as i128;
            let row = &mut by_edges[mask.count_ones() as usize];
            for k in 0..6 {
                row[k] += s[k];
            }
            row[6] += s[1] * s[1];
            row[7] += s[3] * s[1];
            row[8] += s[1] * s[1] * s[1];
            row[9] += s[2] * s[2];
            row[10] += s[1] * s[1] - s[3];
            for k in 0..3 {
                row[11 + k] += c0.pow(k as u32 + 1);
            }
        }
        let mut polys = vec![Poly::zero(m_total); QUANTITIES];
        for (m, row) in by_edges.iter().enumerate() {
            // p^m (1-p)^{M-m} = Σ_j C(M-m, j) (-1)^j p^{m+j}
            for j in 0..=m_total - m {
                let coef = binomial(m_total - m, j) * if j % 2 == 0 { 1 } else { -1 };
                for (q, poly) in polys.iter_mut().enumerate() {
                    poly.0[m + j] += coef * row[q];
                }
            }
        }
        let mut polys: Vec<Poly> = polys.into_iter().map(Poly::trimmed).collect();
        let cluster = polys.split_off(11);
        let pair_product = polys.pop().unwrap();
        let s3_sq = polys.pop().unwrap();
        let s2_cube = polys.pop().unwrap();
        let s4_s2 = polys.pop().unwrap();
        let s2_sq = polys.pop().unwrap();
        Ok(Self { n, s: polys, s2_sq, s4_s2, s2_cube, s3_sq, pair_product, cluster })
    }

    /// `S_n(p) = n E|C(v)|`.
    pub fn susceptibility_sum(&self) -> Poly {
        self.cluster[0].scaled(self.n as i128)
    }
}

/// Exact expectations for `G(n, p)` at a rational `p`.
#[derive(Debug, Clone)]
pub struct ExactGnpReport {
    pub n: usize,
    pub p: RBig,
    /// `E[s_k]`, `k = 1..=6`.
    pub e_s: Vec<RBig>,
    pub e_s2_sq: RBig,
    pub e_s4_s2: RBig,
    pub e_s2_cube: RBig,
    pub e_s3_sq: RBig,
    /// `S_n(p) = n E|C(v)|`.
    pub s_n: RBig,
    pub ds_n_dp: RBig,
    pub e_pair_product: RBig,
}

impl ExactGnpReport {
    /// `E|C(v)| = S_n(p) / n`.
    pub fn chi(&self) -> RBig {
        self.s_n.clone() / RBig::from(self.n as i64)
    }
}

pub fn rational_to_f64(x: &RBig) -> f64 {
    x.to_f64().value()
}

/// Enumerates `G(n, p)` for `n ≤ 5` at rational `p ∈ [0, 1]`.
pub fn exact_small_n(n: usize, p: &RBig) -> Result<ExactGnpReport> {
    if *p < RBig::ZERO || *p > RBig::ONE {
        return Err(Error::Domain("p must lie in [0, 1]".into()));
    }
    let polys = GnpPolynomials::enumerate(n)?;
    Ok(report_at(&polys, p))
}

pub fn report_at(polys: &GnpPolynomials, p: &RBig) -> ExactGnpReport {
    let s_n = polys.susceptibility_sum();
    ExactGnpReport {
        n: polys.n,
        p: p.clone(),
        e_s: polys.s.iter().map(|q| q.eval(p)).collect(),
        e_s2_sq: polys.s2_sq.eval(p),
        e_s4_s2: polys.s4_s2.eval(p),
        e_s2_cube: polys.s2_cube.eval(p),
        e_s3_sq: polys.s3_sq.eval(p),
        s_n: s_n.eval(p),
        ds_n_dp: s_n.derivative().eval(p),
        e_pair_product: polys.pair_product.eval(p),
    }
}

/// Outcome of the graph-by-graph pivotal count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotalCheck {
    pub n: usize,
    pub graphs: u64,
    pub mismatches: u64,
}

/// For every graph on `n ≤ 5` vertices, counts triples `(e, v, w)` with `e` a
/// non-edge such that `v` and `w` are disconnected but adding `e` connects
/// them, and compares with `s_2² - s_4`.
pub fn verify_pivotal_identity(n: usize) -> Result<PivotalCheck> {
    if !(1..=5).contains(&n) {
        return Err(Error::Precondition(format!("pivotal check needs 1 <= n <= 5, got {n}")));
    }
    let edges = complete_edges(n);
    let m = edges.len();
    let mut mismatches = 0;
    for mask in 0u32..(1 << m) {
        let before = labels(n, &edges, mask);
        let mut count = 0u64;
        for e in 0..m {
            if mask >> e & 1 == 1 {
                continue;
            }
            let after = labels(n, &edges, mask | 1 << e);
            for v in 0..n {
                for w in 0..n {
                    if before[v] != before[w] && after[v] == after[w] {
                        count += 1;
                    }
                }
            }
        }
        let sizes = component_sizes(&before);
        let s2: u64 = sizes.iter().map(|c| c * c).sum();
        let s4: u64 = sizes.iter().map(|c| c.pow(4)).sum();
        if count != s2 * s2 - s4 {
            mismatches += 1;
        }
    }
    Ok(PivotalCheck { n, graphs: 1 << m, mismatches })
}

/// Susceptibility of bond percolation on the `n`-cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub n: u64,
    pub p: f64,
    pub chi: f64,
    pub dchi_dp: f64,
    pub logder: f64,
}

/// `χ = 1 + Σ_{1≤j<n} (2p^j - p^n)` and
/// `χ' = Σ_{1≤j<n} 2j p^{j-1} (1 - p^{n-j})`.
pub fn cycle_susceptibility(n: u64, p: f64) -> Result<CycleReport> {
    if n < 3 {
        return Err(Error::Precondition(format!("cycle needs n >= 3, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
    }
    let ln_p = p.ln();
    let pow = |e: u64| if p == 0.0 { if e == 0 { 1.0 } else { 0.0 } } else { (e as f64 * ln_p).exp() };
    let one_minus_pow = |e: u64| if p == 0.0 { 1.0 } else { -(e as f64 * ln_p).exp_m1() };
    let mut chi = 1.0;
    let mut dchi = 0.0;
    for j in 1..n {
        chi += pow(j) * (2.0 - pow(n - j));
        dchi += 2.0 * j as f64 * pow(j - 1) * one_minus_pow(n - j);
    }
    Ok(CycleReport { n, p, chi, dchi_dp: dchi, logder: dchi / chi })
}

/// `E|C(v)|` on the `n`-cycle by summing over all `2^n` edge sets.
pub fn cycle_chi_enumerated(n: usize, p: f64) -> Result<f64> {
    if !(3..=20).contains(&n) {
        return Err(Error::Precondition(format!("cycle enumeration needs 3 <= n <= 20, got {n}")));
    }
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        let m = mask.count_ones() as i32;
        let weight = p.powi(m) * (1.0 - p).powi(n as i32 - m);
        let label = labels(n, &edges, mask);
        let c0 = label.iter().filter(|&&l| l == label[0]).count();
        total += weight * c0 as f64;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleScan {
    pub n: u64,
    pub p_star: f64,
    pub logder_max: f64,
    pub at_boundary: bool,
}

/// Maximises the cycle's `d/dp log χ` over `p_grid`, then refines the
/// bracket around the best point by golden-section search.
pub fn cycle_scan(n: u64, p_grid: &[f64]) -> Result<CycleScan> {
    if p_grid.len() < 3 || p_grid.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::Precondition("cycle scan needs at least three grid points in (0, 1)".into()));
    }
    if p_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("cycle scan grid must be increasing".into()));
    }
    let g = |p: f64| cycle_susceptibility(n, p).map(|r| r.logder);
    let values = p_grid.iter().map(|&p| g(p)).collect::<Result<Vec<_>>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v > values[b] { i } else { b });
    if best == 0 || best == p_grid.len() - 1 {
        return Ok(CycleScan { n, p_star: p_grid[best], logder_max: values[best], at_boundary: true });
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (p_grid[best - 1], p_grid[best + 1]);
    let (mut best_p, mut best_g) = (p_grid[best], values[best]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    while b - a > 1e-12 * (1.0 - a).max(1e-300) && b - a > 4.0 * f64::EPSILON {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d)?;
        }
        for (x, v) in [(c, gc), (d, gd)] {
            if v > best_g {
                best_p = x;
                best_g = v;
            }
        }
    }
    Ok(CycleScan { n, p_star: best_p, logder_max: best_g, at_boundary: false })
}

/// Positive root `ρ` of `1 - ρ = e^{-(1+ε)ρ}` by bisection.
pub fn rho_solver(eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!(
            "rho needs eps > 0 (for eps <= 0 the only root is 0), got {eps}"
        )));
    }
    // h(ρ) = 1 - ρ - e^{-(1+ε)ρ}, positive left of the root
    let h = |r: f64| -r - (-(1.0 + eps) * r).exp_m1();
    let (mut lo, mut hi) = (1e-16, 1.0 - 1e-16);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Survival probability of a Poisson(λ) Galton–Watson tree.
pub fn bp_survival(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("offspring mean must be finite and >= 0, got {lambda}")));
    }
    if lambda <= 1.0 {
        Ok(0.0)
    } else {
        rho_solver(lambda - 1.0)
    }
}

/// `P(|T_λ| = k) = e^{-λk} (λk)^{k-1} / k!` for the total size of a
/// Poisson(λ) Galton–Watson tree.
pub fn otter_dwass_pmf(lambda: f64, k: u64) -> Result<f64> {
    if !(lambda >= 0.0) || k < 1 {
        return Err(Error::Domain(format!("pmf needs lambda >= 0 and k >= 1, got {lambda}, {k}")));
    }
    if lambda == 0.0 {
        return Ok(if k == 1 { 1.0 } else { 0.0 });
    }
    let kf = k as f64;
    let ln = -lambda * kf + (kf - 1.0) * (lambda * kf).ln() - specfun::ln_gamma_f64(kf + 1.0);
    Ok(ln.exp())
}

/// One side of the susceptibility check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub applicable: bool,
    /// Estimated or exact `E|C(v)|`.
    pub mean: f64,
    pub stderr: f64,
    pub bound: f64,
    /// `bound - mean`; positive when the inequality holds with room.
    pub margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityReport {
    pub n: u64,
    pub p: f64,
    pub eps: f64,
    /// `"exact"` for `n ≤ 5`, `"monte carlo"` otherwise.
    pub method: String,
    /// `E|C(v)| ≤ 1/ε` when `np ≤ 1 - ε`.
    pub subcritical: BoundCheck,
    /// `E|C(v)| ≤ D max(ε²n, n^{1/3})` when `np ≤ 1 + ε`, with `D` replaced by
    /// the proxy [`SUSCEPTIBILITY_D`].
    pub supercritical: BoundCheck,
}

/// Stand-in for the unspecified constant of the near-critical bound.
pub const SUSCEPTIBILITY_D: f64 = 10.0;

/// Checks both susceptibility bounds, exactly for `n ≤ 5` and from
/// `replicates` Monte Carlo samples otherwise. Monte Carlo checks pass when
/// the bound lies within three standard errors above the mean.
pub fn verify_susceptibility_bounds(
    n: u64,
    p: f64,
    eps: f64,
    replicates: u64,
    seed: u64,
) -> Result<SusceptibilityReport> {
    if !(eps > 0.0) || !(0.0..=1.0).contains(&p) || n < 1 {
        return Err(Error::Precondition(format!("need n >= 1, p in [0, 1], eps > 0; got {n}, {p}, {eps}")));
    }
    let (mean, stderr, method) = if n <= 5 {
        let polys = GnpPolynomials::enumerate(n as usize)?;
        (polys.cluster[0].eval_f64(p), 0.0, "exact")
    } else {
        let samples = percolation::replicate_functionals(n, p, replicates.max(2), seed)?;
        let scale = (n as f64).powf(1.0 / 3.0);
        let mut w = Welford::new();
        samples.iter().for_each(|s| w.push(s.xk(2) * scale));
        (w.mean(), w.stderr(), "monte carlo")
    };
    let np = n as f64 * p;
    let check = |applicable: bool, bound: f64| {
        let margin = bound - mean;
        BoundCheck {
            applicable,
            mean,
            stderr,
            bound,
            margin,
            passed: !applicable || mean - 3.0 * stderr <= bound,
        }
    };
    let nf = n as f64;
    Ok(SusceptibilityReport {
        n,
        p,
        eps,
        method: method.to_string(),
        subcritical: check(np <= 1.0 - eps, 1.0 / eps),
        supercritical: check(np <= 1.0 + eps, SUSCEPTIBILITY_D * (eps * eps * nf).max(nf.powf(1.0 / 3.0))),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeGraphReport {
    pub n: usize,
    pub p: f64,
    pub k: u32,
    /// `E|C(v)|^k`.
    pub lhs: f64,
    /// `(2k-3)!! (E|C(v)|)^{2k-1}`.
    pub rhs: f64,
    pub holds: bool,
}

/// Exact check of `E|C(v)|^k ≤ (2k-3)!! (E|C(v)|)^{2k-1}` for `n ≤ 5`.
pub fn verify_tree_graph(n: usize, p: &RBig, k: u32) -> Result<TreeGraphReport> {
    if !(2..=3).contains(&k) {
        return Err(Error::Precondition(format!("tree-graph check supports k in {{2, 3}}, got {k}")));
    }
    if *p < RBig::ZERO || *p > RBig::ONE {
        return Err(Error::Domain("p must lie in [0, 1]".into()));
    }
    let polys = GnpPolynomials::enumerate(n)?;
    let chi = polys.cluster[0].eval(p);
    let lhs = polys.cluster[k as usize - 1].eval(p);
    let sf = specfun::semifactorial(2 * k as i64 - 3)?;
    let mut rhs = RBig::from(IBig::from(sf));
    for _ in 0..2 * k - 1 {
        rhs *= &chi;
    }
    Ok(TreeGraphReport {
        n,
        p: rational_to_f64(p),
        k,
        lhs: rational_to_f64(&lhs),
        rhs: rational_to_f64(&rhs),
        holds: lhs <= rhs,
    })
}

/// `num / den` as an exact rational.
pub fn ratio(num: i64, den: u64) -> RBig {
    RBig::from_parts(IBig::from(num), den.into())
}
