mod common;

use common::*;
use pinlab::partition::{compute_constrained, compute_constrained_fast, compute_free, compute_ladder};
use pinlab::rng::PinRng;
use pinlab::{ChargeDist, Environment, LawFamily, ModelParams, RenewalLaw};

const TOL: f64 = 1e-10;

#[test]
fn law_tables_match_closed_forms() {
    let families = [
        LawFamily::PowerLaw { alpha: 0.3 },
        LawFamily::PowerLaw { alpha: 1.0 },
        LawFamily::PowerLaw { alpha: 2.5 },
        LawFamily::SimpleRandomWalkReturn,
        LawFamily::Geometric { p: 0.2 },
    ];
    for family in families {
        let law = RenewalLaw::build(family, 200).unwrap();
        let k = oracle_masses(family, 200);
        for n in 1..=200 {
            assert!(rel(law.mass(n).unwrap(), k[n]) < 1e-12, "{family:?} K({n})");
        }
        for m in [1, 2, 3, 10, 57, 200, 201] {
            assert!(rel(law.tail(m).unwrap(), oracle_tail(family, m)) < 1e-11, "{family:?} tail({m})");
        }
    }
}

#[test]
fn tables_match_enumeration() {
    let mut rng = PinRng::new(2024);
    for case_index in 0..30 {
        let case = RandomCase::draw(&mut rng);
        let n_max = 12;
        let (env, law) = case.build(n_max);
        let z = compute_constrained(&env, &law, &case.params, n_max).unwrap();
        let zf = compute_free(&env, &law, &case.params, n_max).unwrap();
        let t = compute_ladder(&env, &law, &case.params, n_max, n_max).unwrap();
        for n in 1..=n_max {
            let e = enumerate(case.family, env.charges(), case.params, n);
            let ctx = || format!("case {case_index} {:?} n={n}", case.family);
            assert!(rel_log(z[n], e.z()) < TOL, "Z {}", ctx());
            assert!(rel_log(zf[n], e.free) < TOL, "Zf {}", ctx());
            for level in 0..=n {
                assert!(rel_log(t.log_g(level, n), e.by_jumps[level]) < TOL, "G_{level} {}", ctx());
            }
            for min_jumps in 1..=n {
                let got = t.event_restricted(n, min_jumps).unwrap();
                assert!(rel_log(got, e.at_least(min_jumps)) < TOL, "E_{min_jumps} {}", ctx());
            }
        }
    }
}

#[test]
fn capped_ladder_matches_enumeration() {
    // N_max < n: the at-least table must still be exact
    let family = LawFamily::PowerLaw { alpha: 0.7 };
    let env = Environment::generate(ChargeDist::StandardGaussian, 5, 14).unwrap();
    let law = RenewalLaw::build(family, 14).unwrap();
    let params = ModelParams::new(0.9, -0.4).unwrap();
    let t = compute_ladder(&env, &law, &params, 4, 14).unwrap();
    let e = enumerate(family, env.charges(), params, 14);
    for level in 1..=4 {
        assert!(rel_log(t.event_restricted(14, level).unwrap(), e.at_least(level)) < TOL);
    }
    assert!(t.event_restricted(14, 5).is_err());
}

#[test]
fn fast_engine_matches_enumeration() {
    let mut rng = PinRng::new(77);
    for _ in 0..20 {
        let case = RandomCase::draw(&mut rng);
        let (env, law) = case.build(16);
        let fast = compute_constrained_fast(&env, &law, &case.params, 16).unwrap();
        for n in [1, 5, 11, 16] {
            let e = enumerate(case.family, env.charges(), case.params, n);
            assert!(rel_log(fast.log_z[n], e.z()) < TOL, "{:?} n={n}", case.family);
        }
    }
}

#[test]
fn single_jump_lower_bound() {
    let mut rng = PinRng::new(8);
    for _ in 0..20 {
        let case = RandomCase::draw(&mut rng);
        let (env, law) = case.build(300);
        let z = compute_constrained(&env, &law, &case.params, 300).unwrap();
        let w0 = case.params.log_weight(env.charges()[0]);
        for n in 1..=300 {
            let lk = law.log_mass(n).unwrap();
            assert!(z[n] >= lk + w0 - 1e-12 * (lk + w0).abs().max(1.0), "n={n}");
        }
    }
}
