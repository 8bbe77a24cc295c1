mod common;

use common::*;
use pinlab::rng::PinRng;
use pinlab::{ChargeDist, Environment, LawFamily, PinError, RenewalLaw};
use statrs::distribution::{ContinuousCDF, Normal};

/// Sample mean and raw second moment (the variance, as the mean is zero).
fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    (xs.iter().sum::<f64>() / n, xs.iter().map(|x| x * x).sum::<f64>() / n)
}

#[test]
fn charge_moments() {
    let n = 1_000_000;
    // (dist, fourth moment of a unit-variance charge)
    for (dist, m4) in [
        (ChargeDist::StandardGaussian, 3.0),
        (ChargeDist::Rademacher, 1.0),
        (ChargeDist::unit_uniform(), 1.8),
    ] {
        let env = Environment::generate(dist, 17, n).unwrap();
        let (mean, var) = moments(env.charges());
        let n = n as f64;
        assert!(mean.abs() < 4.0 / n.sqrt(), "{dist:?} mean {mean}");
        assert!((var - 1.0).abs() < 4.0 * ((m4 - 1.0) / n).sqrt() + 1e-9, "{dist:?} var {var}");
    }
    let env = Environment::generate(ChargeDist::Rademacher, 3, 1000).unwrap();
    assert!(env.charges().iter().all(|&c| c == 1.0 || c == -1.0));
    let w = 0.7;
    let env = Environment::generate(ChargeDist::CenteredUniform { half_width: w }, 3, 10_000).unwrap();
    assert!(env.charges().iter().all(|&c| c.abs() <= w));
}

#[test]
fn gaussian_charges_pass_kolmogorov_smirnov() {
    let env = Environment::generate(ChargeDist::StandardGaussian, 5, 100_000).unwrap();
    let mut xs = env.charges().to_vec();
    xs.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    // 1.95 / sqrt(n) is the 0.1% critical value
    assert!(d < 1.95 / n.sqrt(), "D = {d}");
}

#[test]
fn generation_is_deterministic() {
    let a = Environment::generate(ChargeDist::StandardGaussian, 42, 500).unwrap();
    let b = Environment::generate(ChargeDist::StandardGaussian, 42, 500).unwrap();
    let c = Environment::generate(ChargeDist::StandardGaussian, 43, 500).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
    assert_ne!(a.charges(), c.charges());
    // a longer draw with the same seed extends the shorter one
    let long = Environment::generate(ChargeDist::StandardGaussian, 42, 900).unwrap();
    assert_eq!(&long.charges()[..500], a.charges());
}

#[test]
fn persisted_environments_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (len, dist) in [
        (1, ChargeDist::StandardGaussian),
        (1_000, ChargeDist::CenteredUniform { half_width: 0.25 }),
        (1_000_000, ChargeDist::Rademacher),
    ] {
        let env = Environment::generate(dist, len as u64, len).unwrap();
        let path = dir.path().join(format!("env-{len}.pinenv"));
        env.persist(&path).unwrap();
        let back = Environment::load(&path).unwrap();
        assert_eq!(back, env);
        assert_eq!(back.checksum(), env.checksum());
    }
}

#[test]
fn damaged_files_are_rejected() {
    let env = Environment::generate(ChargeDist::StandardGaussian, 8, 64).unwrap();
    let bytes = env.to_bytes();

    let mut flipped = bytes.clone();
    flipped[40] ^= 1;
    assert!(matches!(Environment::from_bytes(&flipped), Err(PinError::ChecksumMismatch { .. })));

    assert!(matches!(Environment::from_bytes(&bytes[..bytes.len() - 9]), Err(PinError::TruncatedFile { .. })));

    let mut magic = bytes.clone();
    magic[0] = b'X';
    assert!(matches!(Environment::from_bytes(&magic), Err(PinError::BadMagic)));

    let mut version = bytes;
    version[6] = b'9';
    assert!(matches!(Environment::from_bytes(&version), Err(PinError::VersionMismatch(b'9'))));
}

#[test]
fn gap_draws_follow_the_law() {
    let n_table = 40;
    let total = 200_000u64;
    for family in [
        LawFamily::PowerLaw { alpha: 0.4 },
        LawFamily::PowerLaw { alpha: 1.5 },
        LawFamily::SimpleRandomWalkReturn,
        LawFamily::Geometric { p: 0.15 },
    ] {
        let law = RenewalLaw::build(family, n_table).unwrap();
        let mut rng = PinRng::new(1234);
        // cells 1..=n_table, then one cell for everything beyond the table
        let mut counts = vec![0u64; n_table + 1];
        for _ in 0..total {
            let gap = law.sample_gap(&mut rng);
            assert!(gap >= 1);
            if family == LawFamily::SimpleRandomWalkReturn {
                assert_eq!(gap % 2, 0);
            }
            counts[gap.min(n_table + 1) - 1] += 1;
        }
        let mut probs: Vec<f64> = (1..=n_table).map(|m| oracle_mass(family, m)).collect();
        probs.push(oracle_tail(family, n_table + 1));
        let (stat, dof) = pearson(&counts, &probs, total);
        let p = chi_square_p(stat, dof);
        assert!(p > 1e-3, "{family:?}: chi2 = {stat}, dof = {dof}, p = {p}");
    }
}

#[test]
fn regular_variation_exponent() {
    // ln(K(n) / K(2n)) / ln 2 → 1 + α
    for (family, n, tol) in [
        (LawFamily::PowerLaw { alpha: 0.3 }, 1000, 1e-12),
        (LawFamily::PowerLaw { alpha: 2.0 }, 1000, 1e-12),
        (LawFamily::SimpleRandomWalkReturn, 2000, 1e-3),
    ] {
        let law = RenewalLaw::build(family, 2 * n).unwrap();
        let ratio = (law.log_mass(n).unwrap() - law.log_mass(2 * n).unwrap()) / 2f64.ln();
        let target = 1.0 + family.alpha().unwrap();
        assert!((ratio - target).abs() < tol, "{family:?}: {ratio}");
        assert!(law.satisfies_regvar());
        // the plain -ln K(n) / ln n drifts towards the same value
        let near = law.regvar_exponent_estimate(n).unwrap();
        let far = law.regvar_exponent_estimate(2 * n).unwrap();
        assert!((far - target).abs() < (near - target).abs());
    }
    assert!(!RenewalLaw::build(LawFamily::Geometric { p: 0.5 }, 10).unwrap().satisfies_regvar());
}
