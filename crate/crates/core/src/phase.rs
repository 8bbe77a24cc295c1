//! Free energy and critical-point estimators.
//!
//! Two independent estimates of `h_c(β)`:
//!
//! * bisection in `h` on the sign of the finite-size free energy
//!   `(1/n) ln Z_n`, taken as a median over a seed ensemble and compared
//!   against `θ(n) = 2 ln(n)/n` rather than zero, since near criticality
//!   `(1/n) ln Z_n` fluctuates on the scale `ln(n)/n`;
//! * the ladder slope: `(1/N) ln F_N → h_c(β) - h`, so a least-squares line
//!   through `ln F_N^{(L)}` over a window of `N` estimates `h_c - h_probe`.
//!   Only the fitted line and its residuals are reported; no limit is assumed.

use rayon::prelude::*;
use serde::Serialize;

use crate::environment::{ChargeDist, Environment, ModelParams};
use crate::error::{PinError, Result};
use crate::logspace::LOG_ZERO;
use crate::partition::{Engine, LadderTables};
use crate::renewal::RenewalLaw;

/// Allowance for the offset between the `θ(n)` crossing and `h_c` at desk-scale horizons.
pub const FINITE_SIZE_BIAS: f64 = 0.02;
/// Largest relative truncation gap accepted inside a slope-fit window.
pub const TRUNCATION_THRESHOLD: f64 = 1e-3;

/// `(1/n) ln Z_n`.
pub fn free_energy_estimate(log_z: &[f64], n: usize) -> Result<f64> {
    if n == 0 || n >= log_z.len() {
        return Err(PinError::OutOfRange {
            index: n,
            min: 1,
            max: log_z.len().saturating_sub(1),
        });
    }
    if log_z[n] == LOG_ZERO {
        return Err(PinError::ZeroPartition(n));
    }
    Ok(log_z[n] / n as f64)
}

/// `(n, (1/n) ln Z_n)` for every `n ≥ 1` with `Z_n > 0`.
pub fn free_energy_sequence(log_z: &[f64]) -> Vec<(usize, f64)> {
    (1..log_z.len())
        .filter(|&n| log_z[n] > LOG_ZERO)
        .map(|n| (n, log_z[n] / n as f64))
        .collect()
}

/// Largest `n ≤ L` with `Z_n > 0`.
pub fn last_reachable(log_z: &[f64]) -> Option<usize> {
    (1..log_z.len()).rev().find(|&n| log_z[n] > LOG_ZERO)
}

/// The annealed critical point `ln E[e^{βω}]`, an upper bound for `h_c(β)`.
pub fn annealed_curve(dist: ChargeDist, beta: f64) -> Result<f64> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(PinError::InvalidParameter(format!("beta must be finite and >= 0, got {beta}")));
    }
    Ok(dist.log_mgf(beta))
}

pub fn bisection_threshold(n: usize) -> f64 {
    2.0 * (n as f64).ln() / n as f64
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BisectionStep {
    pub h: f64,
    pub median_f_hat: f64,
    pub localized: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BisectionEstimate {
    pub hc: f64,
    pub half_width: f64,
    /// `max(half_width, FINITE_SIZE_BIAS)`
    pub uncertainty: f64,
    pub threshold: f64,
    /// site at which `f_hat` is read, the last reachable one
    pub site: usize,
    pub seeds: Vec<u64>,
    /// per-seed `f_hat` at `hc`
    pub seed_f_hat: Vec<f64>,
    /// max - min of `seed_f_hat`
    pub spread: f64,
    pub trace: Vec<BisectionStep>,
}

#[derive(Clone, Copy, Debug)]
pub struct BisectionOptions {
    pub engine: Engine,
    pub lo: f64,
    pub hi: f64,
    pub max_expansions: usize,
}

impl BisectionOptions {
    /// Bracket `[-0.5, ln M(β) + 0.5]` around the annealed bound.
    pub fn around_annealed(dist: ChargeDist, beta: f64) -> Self {
        Self {
            engine: Engine::Fast,
            lo: -0.5,
            hi: dist.log_mgf(beta) + 0.5,
            max_expansions: 6,
        }
    }
}

/// Per-seed environments plus the shared law, evaluated at any `h`.
pub struct Ensemble<'a> {
    law: &'a RenewalLaw,
    envs: Vec<Environment>,
    beta: f64,
    horizon: usize,
    engine: Engine,
}

impl<'a> Ensemble<'a> {
    pub fn new(
        law: &'a RenewalLaw,
        dist: ChargeDist,
        beta: f64,
        seeds: &[u64],
        horizon: usize,
        engine: Engine,
    ) -> Result<Self> {
        if seeds.is_empty() {
            return Err(PinError::Empty);
        }
        let envs = seeds
            .iter()
            .map(|&s| Environment::generate(dist, s, horizon))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { law, envs, beta, horizon, engine })
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.envs.iter().map(Environment::seed).collect()
    }

    pub fn environments(&self) -> &[Environment] {
        &self.envs
    }

    pub fn log_z(&self, h: f64) -> Result<Vec<Vec<f64>>> {
        let params = ModelParams::new(self.beta, h)?;
        self.envs
            .par_iter()
            .map(|env| self.engine.constrained(env, self.law, &params, self.horizon))
            .collect()
    }

    /// Per-seed `f_hat` at the last reachable site, and that site.
    pub fn f_hat(&self, h: f64) -> Result<(Vec<f64>, usize)> {
        let tables = self.log_z(h)?;
        let site = last_reachable(&tables[0]).ok_or(PinError::ZeroPartition(self.horizon))?;
        let values = tables
            .iter()
            .map(|lz| free_energy_estimate(lz, site))
            .collect::<Result<Vec<_>>>()?;
        Ok((values, site))
    }
}

pub fn estimate_hc_bisection(
    law: &RenewalLaw,
    dist: ChargeDist,
    beta: f64,
    seeds: &[u64],
    horizon: usize,
    tol: f64,
) -> Result<BisectionEstimate> {
    estimate_hc_bisection_with(law, dist, beta, seeds, horizon, tol, BisectionOptions::around_annealed(dist, beta))
}

pub fn estimate_hc_bisection_with(
    law: &RenewalLaw,
    dist: ChargeDist,
    beta: f64,
    seeds: &[u64],
    horizon: usize,
    tol: f64,
    options: BisectionOptions,
) -> Result<BisectionEstimate> {
    if !(tol > 0.0) {
        return Err(PinError::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    if !(options.lo < options.hi) {
        return Err(PinError::InvalidParameter(format!(
            "empty bracket [{}, {}]",
            options.lo, options.hi
        )));
    }
    let ensemble = Ensemble::new(law, dist, beta, seeds, horizon, options.engine)?;
    let mut trace = Vec::new();
    let mut site = horizon;
    let mut threshold = bisection_threshold(horizon);
    let mut eval = |h: f64, trace: &mut Vec<BisectionStep>| -> Result<bool> {
        let (values, s) = ensemble.f_hat(h)?;
        site = s;
        threshold = bisection_threshold(s);
        let m = median(&values);
        let localized = m > threshold;
        trace.push(BisectionStep { h, median_f_hat: m, localized });
        Ok(localized)
    };

    let (mut lo, mut hi) = (options.lo, options.hi);
    let mut expansions = 0;
    loop {
        let lo_ok = eval(lo, &mut trace)?;
        let hi_ok = !eval(hi, &mut trace)?;
        if lo_ok && hi_ok {
            break;
        }
        if expansions == options.max_expansions {
            return Err(PinError::BracketFailure { lo, hi });
        }
        let width = hi - lo;
        if !lo_ok {
            lo -= width;
        }
        if !hi_ok {
            hi += width;
        }
        expansions += 1;
    }
    while 0.5 * (hi - lo) > tol {
        let mid = 0.5 * (lo + hi);
        if eval(mid, &mut trace)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let hc = 0.5 * (lo + hi);
    let half_width = 0.5 * (hi - lo);
    let (seed_f_hat, _) = ensemble.f_hat(hc)?;
    let spread = seed_f_hat.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - seed_f_hat.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(BisectionEstimate {
        hc,
        half_width,
        uncertainty: half_width.max(FINITE_SIZE_BIAS),
        threshold,
        site,
        seeds: ensemble.seeds(),
        seed_f_hat,
        spread,
        trace,
    })
}

/// Inclusive range of jump counts used by the slope fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FitWindow {
    pub first: usize,
    pub last: usize,
}

impl FitWindow {
    /// `[20, min(60, N_max/2)]`.
    pub fn default_for(max_jumps: usize) -> Self {
        Self {
            first: 20,
            last: 60.min(max_jumps / 2),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
    pub residual_rms: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let m = x.len();
    if m != y.len() || m < 2 {
        return Err(PinError::InvalidParameter(format!("need at least two paired points, got {m} and {}", y.len())));
    }
    let mf = m as f64;
    let mx = x.iter().sum::<f64>() / mf;
    let my = y.iter().sum::<f64>() / mf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(PinError::InvalidParameter("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_std_error = if m > 2 { (rss / (mf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(LineFit {
        slope,
        intercept,
        slope_std_error,
        residual_rms: (rss / mf).sqrt(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeEstimate {
    pub hc: f64,
    /// two standard errors of the fitted slope
    pub uncertainty: f64,
    pub h_probe: f64,
    pub window: FitWindow,
    pub fit: LineFit,
    pub max_truncation_gap: f64,
}

pub fn estimate_hc_slope(tables: &LadderTables, h_probe: f64, window: FitWindow) -> Result<SlopeEstimate> {
    if window.first == 0 || window.last <= window.first || window.last > tables.max_jumps() {
        return Err(PinError::InvalidParameter(format!(
            "fit window [{}, {}] must satisfy 1 <= N1 < N2 <= {}",
            window.first,
            window.last,
            tables.max_jumps()
        )));
    }
    let probe = tables.params().h;
    if (probe - h_probe).abs() > 1e-12 * probe.abs().max(1.0) {
        return Err(PinError::InvalidParameter(format!(
            "tables were built at h = {probe}, not at the probe {h_probe}"
        )));
    }
    let levels: Vec<usize> = (window.first..=window.last).collect();
    let mut max_gap: f64 = 0.0;
    for &level in &levels {
        let gap = tables.truncation_gap(level);
        max_gap = max_gap.max(gap);
        if gap > TRUNCATION_THRESHOLD {
            return Err(PinError::TruncationGap {
                level,
                gap,
                threshold: TRUNCATION_THRESHOLD,
            });
        }
    }
    let log_f = tables.log_f_trunc();
    if let Some(&level) = levels.iter().find(|&&l| log_f[l] == LOG_ZERO) {
        return Err(PinError::ZeroPartition(level));
    }
    let x: Vec<f64> = levels.iter().map(|&l| l as f64).collect();
    let y: Vec<f64> = levels.iter().map(|&l| log_f[l]).collect();
    let fit = fit_line(&x, &y)?;
    Ok(SlopeEstimate {
        hc: h_probe + fit.slope,
        uncertainty: 2.0 * fit.slope_std_error,
        h_probe,
        window,
        fit,
        max_truncation_gap: max_gap,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedFreeEnergy {
    pub seed: u64,
    pub n: usize,
    pub f_hat: f64,
}

/// Finite-size free energies at one `(β, h)` plus whichever critical-point
/// estimates were run.
#[derive(Clone, Debug, Serialize)]
pub struct PhaseEstimate {
    pub beta: f64,
    pub h: f64,
    pub f_hat: Vec<SeedFreeEnergy>,
    pub hc_bisect: Option<BisectionEstimate>,
    pub hc_slope: Option<SlopeEstimate>,
    pub annealed: f64,
}
