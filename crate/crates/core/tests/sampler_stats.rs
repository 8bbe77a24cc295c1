mod common;

use common::*;
use pinlab::partition::{compute_constrained, compute_ladder};
use pinlab::rng::PinRng;
use pinlab::sampler::{contact_statistics, GibbsSampler};
use pinlab::{ChargeDist, Environment, LawFamily, ModelParams, RenewalLaw};

#[test]
fn jump_counts_match_ladder_law() {
    let env = Environment::generate(ChargeDist::StandardGaussian, 11, 8).unwrap();
    let law = RenewalLaw::build(LawFamily::PowerLaw { alpha: 0.5 }, 8).unwrap();
    let params = ModelParams::new(0.8, 0.1).unwrap();
    let t = compute_ladder(&env, &law, &params, 8, 8).unwrap();
    let exact = t.contact_distribution(8).unwrap();
    let mut sampler = GibbsSampler::new(&t, &env, &law, &params);
    let mut rng = PinRng::new(5);
    let total = 100_000u64;
    let mut counts = vec![0u64; 9];
    for _ in 0..total {
        counts[sampler.sample(8, &mut rng).unwrap().jump_count()] += 1;
    }
    let (stat, dof) = pearson(&counts, &exact, total);
    let p = chi_square_p(stat, dof);
    assert!(p > 1e-3, "chi2 = {stat}, dof = {dof}, p = {p}");
}

#[test]
fn zero_coupling_geometric_first_gap() {
    // at β = h = 0 a geometric renewal is a Bernoulli(p) site process, so
    // conditioning on n ∈ τ leaves site 1 a contact with probability p
    let p_geo = 0.35;
    let n = 40;
    let env = Environment::generate(ChargeDist::Rademacher, 2, n).unwrap();
    let law = RenewalLaw::build(LawFamily::Geometric { p: p_geo }, n).unwrap();
    let params = ModelParams::new(0.0, 0.0).unwrap();
    let log_z = compute_constrained(&env, &law, &params, n).unwrap();
    let mut sampler = GibbsSampler::from_log_z(&log_z, &env, &law, &params);
    let mut rng = PinRng::new(9);
    let total = 50_000;
    let hits = (0..total)
        .filter(|_| sampler.sample(n, &mut rng).unwrap().points()[1] == 1)
        .count() as f64;
    let sigma = (p_geo * (1.0 - p_geo) / total as f64).sqrt();
    assert!((hits / total as f64 - p_geo).abs() < 3.0 * sigma);
}

#[test]
fn marginals_match_split_partition_functions() {
    // P(k ∈ τ) = Z_k Z'_{n-k} / Z_n, Z' built on the environment seen from k
    let n = 30;
    let env = Environment::generate(ChargeDist::StandardGaussian, 21, n + 1).unwrap();
    let law = RenewalLaw::build(LawFamily::PowerLaw { alpha: 0.8 }, n).unwrap();
    let params = ModelParams::new(1.0, 0.2).unwrap();
    let log_z = compute_constrained(&env, &law, &params, n).unwrap();
    let mut sampler = GibbsSampler::from_log_z(&log_z, &env, &law, &params);
    let mut rng = PinRng::new(31);
    let total = 100_000usize;
    let mut hits = vec![0usize; n + 1];
    for _ in 0..total {
        for &k in sampler.sample(n, &mut rng).unwrap().points() {
            hits[k] += 1;
        }
    }
    for k in 1..n {
        let shifted = env.shifted(k).unwrap();
        let tail = compute_constrained(&shifted, &law, &params, n - k).unwrap();
        let exact = (log_z[k] + tail[n - k] - log_z[n]).exp();
        let freq = hits[k] as f64 / total as f64;
        let sigma = (exact * (1.0 - exact) / total as f64).sqrt();
        assert!((freq - exact).abs() <= 4.0 * sigma + 1e-12, "k={k}: {freq} vs {exact}");
    }
}

#[test]
fn event_frequencies_match_exact_ratios() {
    let n = 64;
    let env = Environment::generate(ChargeDist::StandardGaussian, 4, n).unwrap();
    let law = RenewalLaw::build(LawFamily::SimpleRandomWalkReturn, n).unwrap();
    let params = ModelParams::new(0.6, 0.0).unwrap();
    let t = compute_ladder(&env, &law, &params, n, n).unwrap();
    let mut sampler = GibbsSampler::new(&t, &env, &law, &params);
    let mut rng = PinRng::new(12);
    let paths: Vec<_> = (0..100_000).map(|_| sampler.sample(n, &mut rng).unwrap()).collect();
    assert!(paths.iter().all(|p| p.gaps().all(|g| g % 2 == 0)));
    let summary = contact_statistics(&paths).unwrap();
    for (level, &freq) in summary.event_frequency.iter().enumerate().skip(1) {
        let exact = t.event_probability(n, level).unwrap();
        let sigma = (exact * (1.0 - exact) / paths.len() as f64).sqrt();
        assert!((freq - exact).abs() <= 4.0 * sigma + 1e-12, "N={level}: {freq} vs {exact}");
    }
}
