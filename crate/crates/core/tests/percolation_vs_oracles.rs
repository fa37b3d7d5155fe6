//! Monte Carlo percolation estimators checked against exact enumeration and
//! against each other.

use critwin::oracles::{self, rational_to_f64, ratio};
use critwin::percolation::{self, Estimand};
use critwin::stats::Welford;

fn lambda_of(n: u64, p: f64) -> f64 {
    let nf = n as f64;
    (p - 1.0 / nf) * nf.powf(4.0 / 3.0)
}

#[test]
fn mean_s2_on_four_vertices_matches_enumeration() {
    let samples = percolation::replicate_functionals(4, 0.5, 1_000_000, 7).unwrap();
    let scale = 4f64.powf(4.0 / 3.0);
    let mut w = Welford::new();
    samples.iter().for_each(|s| w.push(s.xk(2) * scale));
    let exact = rational_to_f64(&oracles::exact_small_n(4, &ratio(1, 2)).unwrap().e_s[1]);
    assert!((w.mean() - exact).abs() <= 3.0 * w.stderr(), "{} vs {exact}", w.mean());
}

#[test]
fn estimators_on_four_vertices_match_exact_polynomials() {
    let (n, p) = (4u64, 0.3);
    let lambda = lambda_of(n, p);
    let samples = percolation::replicate_functionals(n, p, 400_000, 11).unwrap();
    let exact = oracles::exact_small_n(4, &ratio(3, 10)).unwrap();
    let s = rational_to_f64(&exact.s_n);
    let ds = rational_to_f64(&exact.ds_n_dp);
    let n43 = (n as f64).powf(4.0 / 3.0);

    let logder = percolation::summarize(Estimand::DlogChi, &samples, n, lambda, p, 11);
    let target = ds / s / n43;
    assert!((logder.mean - target).abs() <= 3.0 * logder.stderr, "{logder:?} vs {target}");

    let d1 = percolation::summarize(Estimand::D1, &samples, n, lambda, p, 11);
    let target = (1.0 - p) * ds / (n43 * n43);
    assert!((d1.mean - target).abs() <= 3.0 * d1.stderr, "{d1:?} vs {target}");
}

#[test]
fn coupled_marginal_matches_independent_sampling() {
    let n = 2000;
    let ps = [percolation::window_p(n, -1.0).unwrap(), percolation::window_p(n, 1.0).unwrap()];
    let (mut coupled, mut independent) = (vec![Welford::new(), Welford::new()], vec![Welford::new(), Welford::new()]);
    for seed in 0..3000 {
        let stats = percolation::coupled_sample(n, &ps, seed).unwrap();
        for (i, s) in stats.iter().enumerate() {
            coupled[i].push(s.functionals().xk(2));
            let ind = percolation::sample_gnp_components(n, ps[i], 10_000 + seed).unwrap();
            independent[i].push(ind.functionals().xk(2));
        }
    }
    for i in 0..2 {
        let (a, b) = (&coupled[i], &independent[i]);
        let joint = (a.stderr().powi(2) + b.stderr().powi(2)).sqrt();
        assert!((a.mean() - b.mean()).abs() <= 3.0 * joint, "p index {i}: {} vs {}", a.mean(), b.mean());
    }
}

#[test]
fn subcritical_susceptibility_matches_scaling_function() {
    let est = percolation::estimate_susceptibility(1_000_000, -10.0, 100, 3).unwrap();
    let f2 = critwin::scaling::fk_quadrature(2, -10.0, 1e-10).unwrap();
    assert!(((est.mean - f2) / f2).abs() <= 0.15, "{} vs {f2}", est.mean);
}

#[test]
fn two_large_frequency_is_scale_stable() {
    let a = percolation::two_large_components_freq(100_000, 0.0, 200, 42).unwrap();
    let b = percolation::two_large_components_freq(1_000_000, 0.0, 200, 42).unwrap();
    let joint = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() <= 1.96 * joint, "{a:?} vs {b:?}");
}

#[test]
fn complete_graph_never_has_two_large_components() {
    let samples = percolation::replicate_functionals(50, 1.0, 20, 1).unwrap();
    let s = percolation::summarize(Estimand::TwoLarge, &samples, 50, lambda_of(50, 1.0), 1.0, 1);
    assert_eq!(s.mean, 0.0);
    assert_eq!(s.stderr, 0.0);
}

#[test]
fn stderr_follows_clt_scaling() {
    let small = percolation::estimate_susceptibility(10_000, 0.0, 400, 5).unwrap();
    let large = percolation::estimate_susceptibility(10_000, 0.0, 800, 5).unwrap();
    let ratio = small.stderr / large.stderr;
    assert!((1.2..=1.7).contains(&ratio), "stderr ratio {ratio}");
}

#[test]
fn susceptibility_bounds_hold_by_monte_carlo() {
    let n = 1_000_000u64;
    let eps = (n as f64).powf(-1.0 / 3.0);
    let window = oracles::verify_susceptibility_bounds(n, percolation::window_p(n, 0.0).unwrap(), eps, 20, 9).unwrap();
    assert_eq!(window.method, "monte carlo");
    assert!(window.supercritical.applicable && window.supercritical.passed, "{window:?}");
    assert!(window.supercritical.mean / (n as f64).powf(1.0 / 3.0) < oracles::SUSCEPTIBILITY_D);

    let sub = oracles::verify_susceptibility_bounds(n, 0.5 / n as f64, 0.5, 20, 9).unwrap();
    assert!(sub.subcritical.applicable && sub.subcritical.passed, "{sub:?}");
}
