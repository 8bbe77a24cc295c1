//! Estimates the critical field two ways: bisection on the finite-size free
//! energy and the slope of the ladder decay at a delocalized probe.

use pinlab::partition::compute_ladder;
use pinlab::phase::{estimate_hc_bisection, estimate_hc_slope, FitWindow};
use pinlab::{ChargeDist, Environment, LawFamily, ModelParams, RenewalLaw};

fn main() -> pinlab::Result<()> {
    let horizon = 1 << 13;
    let law = RenewalLaw::build(LawFamily::PowerLaw { alpha: 2.0 }, horizon)?;
    let dist = ChargeDist::StandardGaussian;
    let seeds: Vec<u64> = (1..=8).collect();

    for beta in [0.0, 0.5] {
        let est = estimate_hc_bisection(&law, dist, beta, &seeds, horizon, 1e-3)?;
        println!(
            "beta = {beta}: bisection hc = {:.4} +- {:.4} (annealed bound {:.4})",
            est.hc,
            est.uncertainty,
            dist.log_mgf(beta)
        );
    }

    let env = Environment::generate(dist, 1, 4096)?;
    let tables = compute_ladder(&env, &law, &ModelParams::new(0.0, 0.5)?, 128, 4096)?;
    let slope = estimate_hc_slope(&tables, 0.5, FitWindow::default_for(128))?;
    println!("beta = 0: slope hc = {:.2e} +- {:.1e}", slope.hc, slope.uncertainty);
    Ok(())
}
