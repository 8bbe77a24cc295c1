//! Builds the jump-count ladder for one environment and prints the decay of
//! the truncated partition functions `F_N` along with a few contact-number
//! probabilities.

use pinlab::partition::compute_ladder;
use pinlab::{ChargeDist, Environment, LawFamily, ModelParams, RenewalLaw};

fn main() -> pinlab::Result<()> {
    let horizon = 2048;
    let env = Environment::generate(ChargeDist::StandardGaussian, 1, horizon)?;
    let law = RenewalLaw::build(LawFamily::SimpleRandomWalkReturn, horizon)?;
    let params = ModelParams::new(0.5, 0.5)?;
    let tables = compute_ladder(&env, &law, &params, 64, horizon)?;

    println!("ln Z_L = {:.6}", tables.log_z()[horizon]);
    for level in [1, 2, 4, 8, 16, 32, 64] {
        println!("N = {level:>2}: ln F_N = {:>10.4}", tables.log_f_trunc()[level]);
    }
    for min_jumps in [1, 2, 5, 10] {
        println!("P(at least {min_jumps} jumps by L) = {:.4e}", tables.event_probability(horizon, min_jumps)?);
    }
    Ok(())
}
