//! Times the quadratic reference recursion against the FFT engine.

use pinlab::experiments::{time_engines, VerificationConfig};

fn main() -> pinlab::Result<()> {
    let config = VerificationConfig { beta: 0.5, h: 0.2, ..VerificationConfig::default() };
    for horizon in [1 << 10, 1 << 12, 1 << 14] {
        let t = time_engines(&config, 1, horizon)?;
        println!(
            "L = {horizon:>5}: reference {:.4}s, fast {:.4}s, deviation {:.1e} (bound {:.1e})",
            t.reference_seconds, t.fast_seconds, t.max_rel_deviation, t.fast_error_bound
        );
    }
    Ok(())
}
