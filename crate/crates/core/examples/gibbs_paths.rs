//! Draws exact polymer paths from the Gibbs measure and summarises the
//! contact counts.

use pinlab::partition::compute_ladder;
use pinlab::rng::PinRng;
use pinlab::sampler::{contact_statistics, GibbsSampler};
use pinlab::{ChargeDist, Environment, LawFamily, ModelParams, RenewalLaw};

fn main() -> pinlab::Result<()> {
    let n = 512;
    let env = Environment::generate(ChargeDist::StandardGaussian, 3, n)?;
    let law = RenewalLaw::build(LawFamily::PowerLaw { alpha: 0.5 }, n)?;
    for h in [0.5, 0.0, -0.5] {
        let params = ModelParams::new(0.5, h)?;
        let tables = compute_ladder(&env, &law, &params, 64, n)?;
        let mut sampler = GibbsSampler::new(&tables, &env, &law, &params);
        let mut rng = PinRng::new(42);
        let paths = (0..2000).map(|_| sampler.sample(n, &mut rng)).collect::<pinlab::Result<Vec<_>>>()?;
        let summary = contact_statistics(&paths)?;
        println!(
            "h = {h:+.1}: mean contacts {:.2} (var {:.2}, max {}), first path {}",
            summary.mean_jumps,
            summary.var_jumps,
            summary.max_jumps,
            paths[0].to_line()
        );
    }
    Ok(())
}
