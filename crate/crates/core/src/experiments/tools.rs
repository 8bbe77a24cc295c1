//! Non-verification subcommands: environments, laws, tables, samples, free
//! energies and critical-point estimates.

use rayon::prelude::*;
use serde_json::json;

use crate::error::{PinError, Result};
use crate::logspace::LOG_ZERO;
use crate::partition::write_tables;
use crate::phase::{
    annealed_curve, estimate_hc_bisection_with, estimate_hc_slope, free_energy_estimate, free_energy_sequence,
    last_reachable, BisectionOptions, PhaseEstimate, SeedFreeEnergy,
};
use crate::renewal::RenewalLaw;
use crate::rng::PinRng;
use crate::sampler::{contact_statistics, GibbsSampler};

use super::config::VerificationConfig;
use super::report::{num, Report};
use super::suites::{decay_window, Setup};

pub fn gen_env(config: &VerificationConfig) -> Result<Report> {
    let setup = Setup::new(config)?;
    let mut report = Report::new("gen-env", setup.provenance(config), &["seed", "length", "mean", "variance", "checksum"]);
    for env in &setup.envs {
        let w = env.charges();
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / w.len() as f64;
        let rec = env.record();
        report.row(vec![env.seed().to_string(), env.len().to_string(), num(mean), num(var), rec.checksum.clone()]);
        report.record("environment", json!({ "environment": rec, "mean": mean, "variance": var }));
        report.attachments.push((format!("-{}.pinenv", env.seed()), env.to_bytes()));
    }
    Ok(report)
}

pub fn build_law(config: &VerificationConfig) -> Result<Report> {
    config.validate()?;
    let law = RenewalLaw::build(config.law, config.law_table())?;
    let mut report = Report::new(
        "build-law",
        super::report::Provenance::new(config, law.record(), Vec::new()),
        &["n", "K", "log_K", "tail"],
    );
    for n in 1..=law.n_table() {
        report.row(vec![n.to_string(), num(law.mass(n)?), num(law.log_mass(n)?), num(law.tail(n)?)]);
    }
    let probes: Vec<_> = [16usize, 64, 256, 1024, 4096]
        .into_iter()
        .filter(|&n| 2 * n <= law.n_table())
        .map(|n| json!({ "n": n, "alpha_estimate": law.regvar_exponent_estimate(n).ok() }))
        .collect();
    report.record("law", json!({ "law": law.record(), "alpha": law.alpha(), "regvar_probes": probes }));
    Ok(report)
}

pub fn compute(config: &VerificationConfig) -> Result<Report> {
    let setup = Setup::new(config)?;
    let tables = setup.ladders(config)?;
    let mut report = Report::new("compute", setup.provenance(config), &["seed", "n", "log_Z", "log_Zf"]);
    for (env, t) in setup.envs.iter().zip(&tables) {
        for n in 0..=t.horizon() {
            report.row(vec![env.seed().to_string(), n.to_string(), num(t.log_z()[n]), num(t.log_z_free()[n])]);
        }
        let gaps: Vec<f64> = (0..=t.max_jumps()).map(|l| t.truncation_gap(l)).collect();
        report.record(
            "ladder",
            json!({ "seed": env.seed(), "log_F": t.log_f_trunc(), "truncation_gap": gaps }),
        );
        let mut buf = Vec::new();
        write_tables(t, &mut buf)?;
        report.attachments.push((format!("-{}.tables.tsv", env.seed()), buf));
    }
    Ok(report)
}

/// Draws `samples` paths per seed at `site` (default: last reachable site)
/// and compares the empirical event frequencies with the exact ones.
pub fn sample(config: &VerificationConfig) -> Result<Report> {
    let setup = Setup::new(config)?;
    let tables = setup.ladders(config)?;
    if config.samples == 0 {
        return Err(PinError::Config("samples must be positive".into()));
    }
    let mut report = Report::new("sample", setup.provenance(config), &["seed", "n", "N", "empirical", "exact"]);
    let per_seed = setup
        .envs
        .par_iter()
        .zip(&tables)
        .map(|(env, t)| {
            let n = match config.site {
                Some(n) => n,
                None => last_reachable(t.log_z()).ok_or(PinError::ZeroPartition(config.horizon))?,
            };
            let mut sampler = GibbsSampler::new(t, env, &setup.law, &setup.params);
            let mut rng = PinRng::stream(env.seed(), 1);
            let paths = (0..config.samples)
                .map(|_| sampler.sample(n, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let summary = contact_statistics(&paths)?;
            Ok((env.seed(), n, paths, summary))
        })
        .collect::<Result<Vec<_>>>()?;
    for ((seed, n, paths, summary), t) in per_seed.into_iter().zip(&tables) {
        for (level, &freq) in summary.event_frequency.iter().enumerate().skip(1) {
            let exact = t.event_probability(n, level).ok();
            report.row(vec![seed.to_string(), n.to_string(), level.to_string(), num(freq), exact.map(num).unwrap_or_default()]);
        }
        report.record("summary", json!({ "seed": seed, "beta": config.beta, "h": config.h, "summary": summary }));
        let mut lines = String::new();
        for p in &paths {
            lines.push_str(&p.to_line());
            lines.push('\n');
        }
        report.attachments.push((format!("-{seed}.paths"), lines.into_bytes()));
    }
    Ok(report)
}

/// `(1/n) ln Z_n` along `n` for every seed, with the lower bound
/// `(1/n)(ln K(n) + βω_0 - h)` from the single-jump path checked at every `n`.
pub fn free_energy(config: &VerificationConfig) -> Result<Report> {
    let setup = Setup::new(config)?;
    let mut report = Report::new("free-energy", setup.provenance(config), &["seed", "n", "f_hat", "lower_bound"]);
    let log_zs = setup
        .envs
        .par_iter()
        .map(|env| config.engine.constrained(env, &setup.law, &setup.params, config.horizon))
        .collect::<Result<Vec<_>>>()?;
    let log_k = setup.law.log_mass_table();
    let mut bound_ok = true;
    for (env, log_z) in setup.envs.iter().zip(&log_zs) {
        let w0 = setup.params.log_weight(env.charges()[0]);
        for (n, f) in free_energy_sequence(log_z) {
            let lower = if log_k[n] == LOG_ZERO { f64::NEG_INFINITY } else { (log_k[n] + w0) / n as f64 };
            bound_ok &= f >= lower - 1e-12 * lower.abs().max(1.0) / n as f64;
            report.row(vec![env.seed().to_string(), n.to_string(), num(f), num(lower)]);
        }
        let site = last_reachable(log_z).ok_or(PinError::ZeroPartition(config.horizon))?;
        report.record(
            "f_hat",
            json!(SeedFreeEnergy { seed: env.seed(), n: site, f_hat: free_energy_estimate(log_z, site)? }),
        );
    }
    report.check("single_jump_lower_bound", bound_ok, "f_hat >= (ln K(n) + beta w_0 - h)/n at every n");
    Ok(report)
}

/// Bisection and ladder-slope estimates of `h_c(β)`; the slope uses `h` as
/// the probe and is reported per seed with the median as the estimate.
pub fn hc(config: &VerificationConfig) -> Result<Report> {
    let setup = Setup::new(config)?;
    let mut options = BisectionOptions::around_annealed(config.dist, config.beta);
    options.engine = config.engine;
    let bisect = estimate_hc_bisection_with(&setup.law, config.dist, config.beta, &config.seeds, config.horizon, config.tol, options)?;
    let mut report = Report::new("hc", setup.provenance(config), &["h", "median_f_hat", "localized"]);
    for step in &bisect.trace {
        report.row(vec![num(step.h), num(step.median_f_hat), step.localized.to_string()]);
    }

    let window = decay_window(config.max_jumps).ok();
    let tables = setup.ladders(config)?;
    let mut slopes = Vec::new();
    for (env, t) in setup.envs.iter().zip(&tables) {
        let est = window
            .ok_or_else(|| PinError::Config(format!("Nmax = {} leaves no fit window", config.max_jumps)))
            .and_then(|w| estimate_hc_slope(t, config.h, w));
        match est {
            Ok(est) => {
                report.record("slope", json!({ "seed": env.seed(), "estimate": est }));
                slopes.push(est);
            }
            Err(e) => report.note(format!("seed {}: slope estimator unavailable: {e}", env.seed())),
        }
    }
    slopes.sort_by(|a, b| a.hc.total_cmp(&b.hc));
    let slope = slopes.get(slopes.len() / 2).cloned();
    let f_hat = setup
        .envs
        .iter()
        .zip(&tables)
        .filter_map(|(env, t)| {
            let n = last_reachable(t.log_z())?;
            Some(SeedFreeEnergy { seed: env.seed(), n, f_hat: t.log_z()[n] / n as f64 })
        })
        .collect();
    let estimate = PhaseEstimate {
        beta: config.beta,
        h: config.h,
        f_hat,
        hc_bisect: Some(bisect.clone()),
        hc_slope: slope.clone(),
        annealed: annealed_curve(config.dist, config.beta)?,
    };
    report.record("phase", json!(estimate));
    report.check(
        "below_annealed",
        bisect.hc <= estimate.annealed + bisect.uncertainty,
        format!("bisection {} against annealed {}", bisect.hc, estimate.annealed),
    );
    if let (0.0, Some(s)) = (config.beta, &slope) {
        let gap = (bisect.hc - s.hc).abs();
        report.check(
            "estimators_concordant",
            gap <= bisect.uncertainty + s.uncertainty,
            format!("|bisection - slope| = {gap}"),
        );
    }
    Ok(report)
}
