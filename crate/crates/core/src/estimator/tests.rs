use super::*;
use crate::cycles::{enumerate_candidates, ObjectSet, ObjectiveSpec};
use crate::matrix::{BinaryMatrix, EntrySpace};
use crate::oracle::feasible_states;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn phi(t: f64) -> f64 {
    (-t * t / 2.0).exp() / (2.0 * PI).sqrt()
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, tol: f64, depth: u32) -> f64 {
    let m = (a + b) / 2.0;
    let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
    let (flm, frm) = (f(lm), f(rm));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, tol / 2.0, depth - 1)
}

/// Gaussian tail by adaptive quadrature of the density over `[x, x + 40]`.
fn q_quadrature(x: f64) -> f64 {
    let (a, b) = (x, x + 40.0);
    simpson(&phi, a, b, phi(a), phi((a + b) / 2.0), phi(b), 1e-16, 50)
}

fn fit(a: f64, b: f64, c: f64) -> DecayFit {
    DecayFit { a, b, c, residual: 0.0, kl: None }
}

#[test]
fn q_at_zero_is_half() {
    assert_eq!(q_approx(0.0), 0.5);
    assert!((q_quadrature(0.0) - 0.5).abs() < 1e-10);
}

#[test]
fn q_close_to_quadrature() {
    for k in 0..=50 {
        let x = k as f64 * 0.1;
        let (q, r) = (q_approx(x), q_quadrature(x));
        assert!((q / r - 1.0).abs() < 0.02, "x = {x}: {q} vs {r}");
    }
}

#[test]
fn q_reflection() {
    for x in [0.3, 1.0, 2.7] {
        assert!((q_approx(-x) + q_approx(x) - 1.0).abs() < 1e-15);
    }
}

#[test]
fn sigma_squared_is_slope_of_mean() {
    let f = fit(0.3, 500.0, 0.05);
    for beta in [0.0005, 0.002, 0.006] {
        let h = 1e-7;
        let slope = (f.mu(beta + h) - f.mu(beta - h)) / (2.0 * h);
        let s2 = f.sigma(beta).powi(2);
        assert!((-slope / s2 - 1.0).abs() < 1e-6, "{slope} vs {s2}");
    }
}

#[test]
fn prob_within_monotone_in_eps() {
    let f = fit(0.3, 500.0, 0.05);
    for beta in [0.001, 0.004, 0.02] {
        let mut prev = 0.0;
        for k in 1..40 {
            let p = prob_within(&f, beta, k as f64 * 1e-3).unwrap();
            assert!(p >= prev && (0.0..=1.0).contains(&p));
            prev = p;
        }
    }
    assert!(prob_within(&f, 0.001, 0.0).is_err());
    assert!(prob_within(&f, 0.001, -1.0).is_err());
}

#[test]
fn taylor_matches_exact_tail_difference() {
    let f = fit(0.3, 500.0, 0.05);
    for beta in [0.0, 0.002, 0.004, 0.006] {
        let eps = 1e-3 * f.sigma(beta);
        let x1 = -(f.a / f.b).sqrt() * (-f.b * beta / 2.0).exp();
        let exact = q_quadrature(x1) - q_quadrature(x1 + eps / f.sigma(beta));
        let t = prob_within_taylor(&f, beta, eps);
        assert!((t / exact - 1.0).abs() < 0.01, "beta = {beta}: {t} vs {exact}");
        let g = prob_within_gaussian(&f, beta, eps);
        assert!((g / exact - 1.0).abs() < 0.1, "beta = {beta}: {g} vs {exact}");
    }
}

#[test]
fn tiny_probabilities_fall_back() {
    // the mean sits about fourteen standard deviations above c
    let f = fit(200.0, 1.0, 0.0);
    let p = prob_within(&f, 0.0, 1e-3).unwrap();
    assert!(p > 0.0 && p < 1e-12, "{p}");
    assert_eq!(p, prob_within_taylor(&f, 0.0, 1e-3));
}

#[test]
fn minimum_and_cardinality() {
    let f = fit(0.3, 500.0, 0.05);
    assert_eq!(min_estimate(&f, 40.0), 0.05 * 40.0);
    assert_eq!(min_estimate(&fit(0.3, 500.0, 0.0), 40.0), 0.0);
    let z = 7usize;
    let eps = 0.01;
    let direct = ((2.0 * PI * 0.3 * 500.0).sqrt() * (0.3f64 / 1000.0).exp() / eps).ln() / (z as f64).ln();
    assert!((cardinality_log_z_eps(&f, eps, z) - direct).abs() < 1e-12);
    assert_eq!(cardinality_estimate(&f, 100.0, z), cardinality_log_z_eps(&f, 0.01, z));
    // a huge eps cannot give a negative size
    assert_eq!(cardinality_log_z_eps(&f, 1e9, z), 0.0);
}

#[test]
fn iteration_order_scales_inversely() {
    let f = fit(0.3, 500.0, 0.05);
    let m = AcceptanceModel {
        coef: [0.4, 0.0, 0.0],
        f_min: TRAPPED_ACCEPTANCE,
    };
    let beta = 0.004;
    let eps = 1e-4;
    let it = iter_order(&f, &m, beta, eps).unwrap();
    let p = prob_within(&f, beta, eps).unwrap();
    assert!((it * 0.4 * p - 1.0).abs() < 1e-12);
    let dead = AcceptanceModel {
        coef: [-0.1, 0.0, 0.0],
        f_min: TRAPPED_ACCEPTANCE,
    };
    assert!(iter_order(&f, &dead, beta, eps).is_err());
}

#[test]
fn gaussian_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = Normal::new(0.4, 0.05).unwrap();
    let s: Vec<f64> = (0..10_000).map(|_| n.sample(&mut rng)).collect();
    let g = fit_gaussian(&s, 100.0).unwrap();
    assert!((g.mean / 0.4 - 1.0).abs() < 0.01);
    assert!((g.std / 0.05 - 1.0).abs() < 0.02);
    assert_eq!(g.histogram.iter().map(|h| h.1).sum::<usize>(), 10_000);
    let flat = fit_gaussian(&[0.25; 40], 8.0).unwrap();
    assert_eq!(flat.std, 0.0);
    assert!(flat.degenerate);
    assert_eq!(flat.histogram, vec![(0.25, 40)]);
    assert!(fit_gaussian(&[0.1; 29], 8.0).is_err());
}

#[test]
fn zero_beta_samples_match_enumeration() {
    let base = BinaryMatrix::ones(2, 3);
    let space = EntrySpace::new(&base);
    let l = enumerate_candidates(&base, 2).unwrap();
    let set = ObjectSet::partition(&[&l], &space).unwrap();
    let p = OptProblem::new(set, ObjectiveSpec::weighted(1.0, 0.0, 0.0), vec![vec![0, 1]; 6], 1).unwrap();
    let mut expected = std::collections::BTreeMap::new();
    let all = feasible_states(&p).unwrap();
    for (_, c) in &all {
        *expected.entry((c * 1e9).round() as i64).or_insert(0.0) += 1.0 / all.len() as f64;
    }
    let sampler = SamplerConfig {
        gibbs: true,
        ..SamplerConfig::default()
    };
    let series = collect_samples(&p, &[0; 6], &[0.0], 200_000, 3, sampler).unwrap();
    let s = &series[0].samples;
    assert_eq!(s.len(), 200_000);
    let mut seen = std::collections::BTreeMap::new();
    for c in s {
        *seen.entry((c * 1e9).round() as i64).or_insert(0.0) += 1.0 / s.len() as f64;
    }
    for (k, e) in &expected {
        let got = seen.get(k).copied().unwrap_or(0.0);
        assert!((got - e).abs() < 0.01, "value {k}: {got} vs {e}");
    }
    assert_eq!(seen.len(), expected.len());
}

#[test]
fn analyze_recovers_synthetic_model() {
    let (a, b, c) = (0.3, 500.0, 0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let series: Vec<SampleSeries> = [0.0005, 0.001, 0.002, 0.003, 0.005, 0.008]
        .iter()
        .map(|&beta| {
            let f = fit(a, b, c);
            let n = Normal::new(f.mu(beta), 0.01).unwrap();
            SampleSeries {
                beta,
                samples: (0..20_000).map(|_| n.sample(&mut rng)).collect(),
                acceptance: 0.5 - 40.0 * beta,
                trapped: false,
            }
        })
        .collect();
    let r = analyze(&series, 40.0, 0.025, 7).unwrap();
    assert!((r.fit.b / b - 1.0).abs() < 0.05, "{:?}", r.fit);
    assert!((r.fit.c / c - 1.0).abs() < 0.05, "{:?}", r.fit);
    assert!(r.acceptance.is_some());
    assert!(r.per_beta.iter().all(|x| x.2.is_some()));
    assert!(r.to_text().contains("estimated minimum count"));
    assert_eq!(r.stats_csv().lines().count(), 7);
}
