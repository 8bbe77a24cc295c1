//! Subcommands of the `pinlab` binary, as library functions returning a
//! [`Report`].

mod bench;
mod config;
mod report;
mod suites;
mod tools;

pub use bench::{bench_grid, run_benchmark, time_engines, Timing};
pub use config::{parse_seeds, Overrides, VerificationConfig};
pub use report::{num, Check, Provenance, Report};
pub use suites::{
    contact_sequence, contact_threshold, decay_fit, decay_window, dyadic_grid, ensemble_decay_fit, dyadic_sites, ladder_partial_sum,
    resolve_hc, scan_contact_bound, verify_prop_main, verify_theorem1, verify_theorem2, BoundScan, DecayFit,
    identity_tolerance, HcReference, Setup, IDENTITY_TOLERANCE,
};
pub use tools::{build_law, compute, free_energy, gen_env, hc, sample};

use crate::error::{PinError, Result};

/// 0 when every check passed, 1 on a failed check, 2 on configuration or
/// truncation errors.
pub fn exit_code(outcome: &Result<Report>) -> i32 {
    match outcome {
        Ok(r) if r.passed() => 0,
        Ok(_) => 1,
        Err(_) => 2,
    }
}

/// Runs a subcommand by name.
pub fn run(command: &str, config: &VerificationConfig) -> Result<Report> {
    match command {
        "gen-env" => gen_env(config),
        "build-law" => build_law(config),
        "compute" => compute(config),
        "sample" => sample(config),
        "free-energy" => free_energy(config),
        "hc" => hc(config),
        "verify-thm1" => verify_theorem1(config),
        "verify-prop" => verify_prop_main(config),
        "verify-thm2" => verify_theorem2(config),
        "bench" => run_benchmark(config),
        other => Err(PinError::Config(format!("unknown subcommand `{other}`"))),
    }
}

pub const COMMANDS: [&str; 10] = [
    "gen-env",
    "build-law",
    "compute",
    "sample",
    "free-energy",
    "hc",
    "verify-thm1",
    "verify-prop",
    "verify-thm2",
    "bench",
];
