//! Exact sampling of contact sets under `P_n^{β,h,ω}`.
//!
//! Given `Z_0..Z_n`, the last contact before `k` is `j` with probability
//! `Z_j e^{βω_j - h} K(k - j) / Z_k`. Walking back from `n` to `0` produces a
//! path with exactly the Gibbs law, with no burn-in or mixing.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::environment::{Environment, ModelParams};
use crate::error::{PinError, Result};
use crate::logspace::LOG_ZERO;
use crate::partition::LadderTables;
use crate::renewal::RenewalLaw;
use crate::rng::PinRng;

/// Contact points `0 = l_0 < ... < l_N = n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContactPath {
    points: Vec<usize>,
}

impl ContactPath {
    pub fn new(points: Vec<usize>) -> Result<Self> {
        if points.len() < 2 || points[0] != 0 || points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(PinError::InvalidParameter(format!(
                "contact points must increase strictly from 0, got {points:?}"
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn endpoint(&self) -> usize {
        *self.points.last().expect("non-empty path")
    }

    pub fn jump_count(&self) -> usize {
        self.points.len() - 1
    }

    pub fn gaps(&self) -> impl Iterator<Item = usize> + '_ {
        self.points.windows(2).map(|w| w[1] - w[0])
    }

    /// Space-separated points, the export line format.
    pub fn to_line(&self) -> String {
        self.points.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let points = line
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| PinError::InvalidParameter(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }
}

/// Backward sampler bound to one set of tables.
pub struct GibbsSampler<'a> {
    log_z: &'a [f64],
    log_a: Vec<f64>,
    log_k: &'a [f64],
    weights: Vec<f64>,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(tables: &'a LadderTables, env: &Environment, law: &'a RenewalLaw, params: &ModelParams) -> Self {
        Self::from_log_z(tables.log_z(), env, law, params)
    }

    /// Works from any `ln Z_0..=ln Z_L` computed with the same inputs.
    pub fn from_log_z(log_z: &'a [f64], env: &Environment, law: &'a RenewalLaw, params: &ModelParams) -> Self {
        let horizon = log_z.len() - 1;
        let log_w = env.log_weights(params, horizon);
        let log_a = (0..horizon).map(|j| log_z[j] + log_w[j]).collect();
        Self {
            log_z,
            log_a,
            log_k: law.log_mass_table(),
            weights: Vec::with_capacity(horizon),
        }
    }

    pub fn sample(&mut self, n: usize, rng: &mut PinRng) -> Result<ContactPath> {
        if n == 0 || n >= self.log_z.len() {
            return Err(PinError::OutOfRange {
                index: n,
                min: 1,
                max: self.log_z.len() - 1,
            });
        }
        if self.log_z[n] == LOG_ZERO {
            return Err(PinError::ZeroPartition(n));
        }
        let mut points = vec![n];
        let mut k = n;
        while k > 0 {
            let log_zk = self.log_z[k];
            self.weights.clear();
            let mut total = 0.0;
            for j in 0..k {
                let w = (self.log_a[j] + self.log_k[k - j] - log_zk).exp();
                total += w;
                self.weights.push(total);
            }
            let target = rng.uniform() * total;
            let j = self.weights.partition_point(|&c| c <= target).min(k - 1);
            // never land on a zero-weight predecessor through rounding
            let j = (0..=j).rev().find(|&i| i == 0 || self.weights[i] > self.weights[i - 1]).unwrap_or(0);
            points.push(j);
            k = j;
        }
        points.reverse();
        Ok(ContactPath { points })
    }
}

/// One path from the tables; see [`GibbsSampler`] for repeated draws.
pub fn sample_path(
    tables: &LadderTables,
    env: &Environment,
    law: &RenewalLaw,
    params: &ModelParams,
    n: usize,
    rng: &mut PinRng,
) -> Result<ContactPath> {
    GibbsSampler::new(tables, env, law, params).sample(n, rng)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContactSummary {
    pub n: usize,
    pub samples: usize,
    pub mean_jumps: f64,
    pub var_jumps: f64,
    pub max_jumps: usize,
    /// entry `N` is the fraction of paths with at least `N` jumps, `N = 0..=max_jumps + 1`
    pub event_frequency: Vec<f64>,
    pub gap_histogram: BTreeMap<usize, usize>,
}

pub fn contact_statistics(paths: &[ContactPath]) -> Result<ContactSummary> {
    let first = paths.first().ok_or(PinError::Empty)?;
    let n = first.endpoint();
    if let Some(p) = paths.iter().find(|p| p.endpoint() != n) {
        return Err(PinError::MixedLengths(n, p.endpoint()));
    }
    let count = paths.len() as f64;
    let jumps: Vec<usize> = paths.iter().map(ContactPath::jump_count).collect();
    let max_jumps = *jumps.iter().max().expect("non-empty");
    let mean = jumps.iter().sum::<usize>() as f64 / count;
    let var = jumps.iter().map(|&j| (j as f64 - mean).powi(2)).sum::<f64>() / count;
    let mut at_least = vec![0usize; max_jumps + 2];
    for &j in &jumps {
        at_least[j] += 1;
    }
    for i in (0..=max_jumps).rev() {
        at_least[i] += at_least[i + 1];
    }
    let mut gap_histogram = BTreeMap::new();
    for p in paths {
        for g in p.gaps() {
            *gap_histogram.entry(g).or_insert(0) += 1;
        }
    }
    Ok(ContactSummary {
        n,
        samples: paths.len(),
        mean_jumps: mean,
        var_jumps: var,
        max_jumps,
        event_frequency: at_least.iter().map(|&c| c as f64 / count).collect(),
        gap_histogram,
    })
}
