//! Generates charge sequences, persists one and reads it back.

use pinlab::{ChargeDist, Environment};

fn main() -> pinlab::Result<()> {
    for dist in [ChargeDist::StandardGaussian, ChargeDist::Rademacher, ChargeDist::unit_uniform()] {
        let env = Environment::generate(dist, 11, 100_000)?;
        let n = env.len() as f64;
        let mean = env.charges().iter().sum::<f64>() / n;
        let var = env.charges().iter().map(|x| x * x).sum::<f64>() / n;
        println!("{dist:?}: mean {mean:+.4}, second moment {var:.4}, ln M(1) = {:.4}", dist.log_mgf(1.0));
    }

    let env = Environment::generate(ChargeDist::StandardGaussian, 11, 4096)?;
    let path = std::env::temp_dir().join("pinlab-example.pinenv");
    env.persist(&path)?;
    let back = Environment::load(&path)?;
    assert_eq!(back, env);
    println!("round trip ok: {} ({:016x})", path.display(), back.checksum());
    std::fs::remove_file(path).ok();
    Ok(())
}
