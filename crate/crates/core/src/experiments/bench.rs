use serde::Serialize;
use serde_json::json;
use std::time::Instant;

use crate::environment::{Environment, ModelParams};
use crate::error::Result;
use crate::logspace::log_relative_diff;
use crate::partition::{compute_constrained, compute_constrained_fast};
use crate::phase::fit_line;
use crate::renewal::RenewalLaw;

use super::config::VerificationConfig;
use super::report::{num, Provenance, Report};

pub const DEVIATION_TOLERANCE: f64 = 1e-9;
pub const SCALING_TARGET: f64 = 2.0;
pub const SCALING_TOLERANCE: f64 = 0.3;
pub const REQUIRED_SPEEDUP: f64 = 10.0;

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub horizon: usize,
    pub seed: u64,
    pub reference_seconds: f64,
    pub fast_seconds: f64,
    pub max_rel_deviation: f64,
    pub fast_error_bound: f64,
}

/// Both engines on one `(seed, L)`.
pub fn time_engines(config: &VerificationConfig, seed: u64, horizon: usize) -> Result<Timing> {
    let env = Environment::generate(config.dist, seed, horizon)?;
    let law = RenewalLaw::build(config.law, horizon.max(2))?;
    let params = ModelParams::new(config.beta, config.h)?;
    let start = Instant::now();
    let slow = compute_constrained(&env, &law, &params, horizon)?;
    let reference_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let fast = compute_constrained_fast(&env, &law, &params, horizon)?;
    let fast_seconds = start.elapsed().as_secs_f64();
    let max_rel_deviation = slow
        .iter()
        .zip(&fast.log_z)
        .map(|(&a, &b)| log_relative_diff(a, b))
        .fold(0.0, f64::max);
    Ok(Timing {
        horizon,
        seed,
        reference_seconds,
        fast_seconds,
        max_rel_deviation,
        fast_error_bound: fast.error_bound,
    })
}

/// Powers of two from 256 up to `L` (just `L` when it is smaller).
pub fn bench_grid(horizon: usize) -> Vec<usize> {
    let grid: Vec<usize> = (8..usize::BITS).map(|k| 1usize << k).take_while(|&l| l <= horizon).collect();
    if grid.is_empty() {
        vec![horizon]
    } else {
        grid
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Reference vs fast engine over the grid and seeds, the reference scaling
/// exponent from a log-log fit, and one fast run at `fast_L` compared with
/// the reference time extrapolated along the fitted exponent.
pub fn run_benchmark(config: &VerificationConfig) -> Result<Report> {
    config.validate()?;
    let grid = bench_grid(config.horizon);
    let law = RenewalLaw::build(config.law, config.law_table())?;
    let envs: Vec<_> = config
        .seeds
        .iter()
        .map(|&s| Environment::generate(config.dist, s, config.horizon).map(|e| e.record()))
        .collect::<Result<_>>()?;
    let mut report = Report::new(
        "bench",
        Provenance::new(config, law.record(), envs),
        &["L", "seed", "reference_seconds", "fast_seconds", "max_rel_deviation", "fast_error_bound"],
    );
    // timings run one after another so they do not compete for cores
    let mut timings = Vec::new();
    for &l in &grid {
        for &seed in &config.seeds {
            let t = time_engines(config, seed, l)?;
            report.row(vec![
                l.to_string(),
                seed.to_string(),
                num(t.reference_seconds),
                num(t.fast_seconds),
                num(t.max_rel_deviation),
                num(t.fast_error_bound),
            ]);
            report.record("timing", json!(t));
            timings.push(t);
        }
    }
    let worst = timings.iter().map(|t| t.max_rel_deviation).fold(0.0, f64::max);
    report.check(
        "engines_agree",
        worst <= DEVIATION_TOLERANCE,
        format!("max relative deviation {worst:e}"),
    );

    // small horizons are dominated by fixed costs
    let fit_points: Vec<usize> = {
        let big: Vec<usize> = grid.iter().copied().filter(|&l| l >= 1024).collect();
        if big.len() >= 2 {
            big
        } else {
            grid.clone()
        }
    };
    if fit_points.len() < 2 {
        report.note("fewer than two horizons; no scaling fit");
        return Ok(report);
    }
    let med = |l: usize| median(timings.iter().filter(|t| t.horizon == l).map(|t| t.reference_seconds).collect());
    let x: Vec<f64> = fit_points.iter().map(|&l| (l as f64).ln()).collect();
    let y: Vec<f64> = fit_points.iter().map(|&l| med(l).ln()).collect();
    let fit = fit_line(&x, &y)?;
    let exponent = fit.slope;
    report.check(
        "reference_scaling",
        (exponent - SCALING_TARGET).abs() <= SCALING_TOLERANCE,
        format!("log-log slope {exponent:.3}"),
    );

    let fast_horizon = config.fast_horizon;
    let env = Environment::generate(config.dist, config.seeds[0], fast_horizon)?;
    let big_law = RenewalLaw::build(config.law, fast_horizon.max(2))?;
    let params = ModelParams::new(config.beta, config.h)?;
    let start = Instant::now();
    let out = compute_constrained_fast(&env, &big_law, &params, fast_horizon)?;
    let fast_seconds = start.elapsed().as_secs_f64();
    let last = *fit_points.last().expect("non-empty");
    let extrapolated = med(last) * (fast_horizon as f64 / last as f64).powf(exponent);
    let speedup = extrapolated / fast_seconds;
    report.record(
        "fast_large",
        json!({
            "L": fast_horizon,
            "fast_seconds": fast_seconds,
            "reference_extrapolated_seconds": extrapolated,
            "speedup": speedup,
            "error_bound": out.error_bound,
            "reference_exponent": exponent,
        }),
    );
    report.check(
        "fast_speedup",
        speedup >= REQUIRED_SPEEDUP,
        format!("L = {fast_horizon}: {fast_seconds:.3}s against extrapolated {extrapolated:.1}s ({speedup:.1}x)"),
    );
    Ok(report)
}
