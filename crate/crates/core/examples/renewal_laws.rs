//! Tabulates the built-in inter-arrival laws and draws a few gaps from each.

use pinlab::rng::PinRng;
use pinlab::{LawFamily, RenewalLaw};

fn main() -> pinlab::Result<()> {
    let families = [
        LawFamily::PowerLaw { alpha: 0.5 },
        LawFamily::PowerLaw { alpha: 2.0 },
        LawFamily::SimpleRandomWalkReturn,
        LawFamily::Geometric { p: 0.3 },
    ];
    let mut rng = PinRng::new(7);
    for family in families {
        let law = RenewalLaw::build(family, 1000)?;
        let gaps: Vec<usize> = (0..8).map(|_| law.sample_gap(&mut rng)).collect();
        println!(
            "{:<10} K(1)={:.4} K(2)={:.4} tail(1000)={:.3e} exponent~{:.3} gaps={gaps:?}",
            family.name(),
            law.mass(1)?,
            law.mass(2)?,
            law.tail(1000)?,
            law.regvar_exponent_estimate(1000)?,
        );
    }
    Ok(())
}
