use serde::Serialize;

use super::kernel::{Split, TiltedKernel};
use super::reference::{constrained_split, free_from_constrained};
use super::{check_horizon, ENGINE_VERSION};
use crate::environment::{Environment, EnvironmentRecord, ModelParams};
use crate::error::{PinError, Result};
use crate::logspace::{log_add, log_sum_exp, LOG_ZERO};
use crate::renewal::{LawRecord, RenewalLaw};

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub law: LawRecord,
    pub environment: EnvironmentRecord,
    pub params: ModelParams,
    pub engine: String,
}

/// Log-domain tables for one `(environment, law, params)` triple up to a
/// horizon `L` and a jump cap `N_max`.
///
/// Rows of the jump tables are stored from `n = N` on, since a path with `N`
/// jumps cannot end before `N`.
#[derive(Clone, Debug)]
pub struct LadderTables {
    horizon: usize,
    max_jumps: usize,
    provenance: Provenance,
    log_z: Vec<f64>,
    log_z_free: Vec<f64>,
    /// `log_g[N][n - N] = ln G_{N,n}`
    log_g: Vec<Vec<f64>>,
    /// `log_h[N][n - N] = ln H_{N,n}`
    log_h: Vec<Vec<f64>>,
    /// `ln F_N^{(L)}`, index `N`
    log_f: Vec<f64>,
}

/// Builds every table. `G` rows come from `G_{N,n} = Σ_{j<n} G_{N-1,j}
/// e^{βω_j - h} K(n - j)`, costing `O(N_max L²)`. When `N_max ≥ L` the
/// at-least table is a suffix sum over complete columns; otherwise it runs its
/// own recursion `H_{N,n} = Σ_{j<n} H_{N-1,j} e^{βω_j - h} K(n - j)` from
/// `H_0 = Z`, which stays exact for every `N ≤ N_max` whatever `n` is.
pub fn compute_ladder(
    env: &Environment,
    law: &RenewalLaw,
    params: &ModelParams,
    max_jumps: usize,
    horizon: usize,
) -> Result<LadderTables> {
    check_horizon(env, law, horizon)?;
    if max_jumps == 0 || max_jumps > horizon {
        return Err(PinError::InvalidParameter(format!(
            "N_max must lie in 1..={horizon}, got {max_jumps}"
        )));
    }
    let z = constrained_split(env, law, params, horizon)?;
    let log_z: Vec<f64> = z.iter().map(|x| x.value()).collect();
    let log_z_free = free_from_constrained(env, law, params, &z);
    let log_w = env.log_weights(params, horizon);
    let kernel = TiltedKernel::new(law.log_mass_table(), horizon);

    // rows are carried in split form from level to level and stored plain
    let next_row = |prev: &[Split], level: usize| -> Vec<Split> {
        // prev holds n = level-1 ..= horizon
        let mut input = vec![Split::ZERO; horizon];
        for (j, slot) in input.iter_mut().enumerate().skip(level - 1) {
            *slot = prev[j + 1 - level].add(log_w[j]);
        }
        kernel.convolve(&input, level, horizon)
    };
    let plain = |row: &[Split]| -> Vec<f64> { row.iter().map(|x| x.value()).collect() };

    let mut log_g: Vec<Vec<f64>> = Vec::with_capacity(max_jumps + 1);
    let mut row = vec![Split::ZERO; horizon + 1];
    row[0] = Split::ONE;
    log_g.push(plain(&row));
    for level in 1..=max_jumps {
        row = next_row(&row, level);
        log_g.push(plain(&row));
    }

    let log_h = if max_jumps >= horizon {
        suffix_columns(&log_g, horizon)
    } else {
        let mut rows = Vec::with_capacity(max_jumps + 1);
        rows.push(log_z.clone());
        let mut row = z;
        for level in 1..=max_jumps {
            row = next_row(&row, level);
            rows.push(plain(&row));
        }
        rows
    };

    let log_f = log_g.iter().map(|row| log_sum_exp(row)).collect();
    Ok(LadderTables {
        horizon,
        max_jumps,
        provenance: Provenance {
            law: law.record(),
            environment: env.record(),
            params: *params,
            engine: ENGINE_VERSION.to_string(),
        },
        log_z,
        log_z_free,
        log_g,
        log_h,
        log_f,
    })
}

fn suffix_columns(log_g: &[Vec<f64>], horizon: usize) -> Vec<Vec<f64>> {
    let top = log_g.len() - 1;
    let mut rows: Vec<Vec<f64>> = (0..=top).map(|level| vec![LOG_ZERO; horizon + 1 - level]).collect();
    for n in 0..=horizon {
        let mut acc = LOG_ZERO;
        for level in (0..=top.min(n)).rev() {
            acc = log_add(acc, log_g[level][n - level]);
            rows[level][n - level] = acc;
        }
    }
    rows
}

impl LadderTables {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn max_jumps(&self) -> usize {
        self.max_jumps
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn params(&self) -> ModelParams {
        self.provenance.params
    }

    /// `ln Z_n` for `n = 0..=L`.
    pub fn log_z(&self) -> &[f64] {
        &self.log_z
    }

    pub fn log_z_free(&self) -> &[f64] {
        &self.log_z_free
    }

    /// `ln G_{N,n}`; `-∞` for `n < N`.
    pub fn log_g(&self, level: usize, n: usize) -> f64 {
        assert!(level <= self.max_jumps && n <= self.horizon, "({level}, {n}) outside ladder");
        if n < level {
            LOG_ZERO
        } else {
            self.log_g[level][n - level]
        }
    }

    /// `ln H_{N,n} = ln Σ_{N'≥N} G_{N',n}`.
    pub fn log_at_least(&self, level: usize, n: usize) -> f64 {
        assert!(level <= self.max_jumps && n <= self.horizon, "({level}, {n}) outside ladder");
        if n < level {
            LOG_ZERO
        } else {
            self.log_h[level][n - level]
        }
    }

    /// `ln F_N^{(L)}` for `N = 0..=N_max` (`F_0 = 1`).
    pub fn log_f_trunc(&self) -> &[f64] {
        &self.log_f
    }

    /// `ln F_N^{(L')} = ln Σ_{n≤L'} G_{N,n}` for any `L' ≤ L`.
    pub fn log_f_trunc_at(&self, level: usize, horizon: usize) -> f64 {
        assert!(level <= self.max_jumps && horizon <= self.horizon);
        if horizon < level {
            return LOG_ZERO;
        }
        log_sum_exp(&self.log_g[level][..=horizon - level])
    }

    /// Relative convergence diagnostic `(F_N^{(L)} - F_N^{(L/2)}) / F_N^{(L)}`.
    pub fn truncation_gap(&self, level: usize) -> f64 {
        let full = self.log_f[level];
        if full == LOG_ZERO {
            return 0.0;
        }
        let half = self.log_f_trunc_at(level, self.horizon / 2);
        -(half - full).exp_m1()
    }

    /// `ln Σ_{N=1}^{N_max} G_{N,n}`; equals `ln Z_n` when `N_max ≥ n`.
    pub fn column_sum(&self, n: usize) -> f64 {
        let terms: Vec<f64> = (1..=self.max_jumps.min(n)).map(|level| self.log_g(level, n)).collect();
        log_sum_exp(&terms)
    }

    /// `ln Z_n(E_{n,N0})`, the weight of paths with at least `N0` jumps.
    pub fn event_restricted(&self, n: usize, min_jumps: usize) -> Result<f64> {
        self.check_site(n)?;
        if min_jumps == 0 {
            return Err(PinError::InvalidParameter("N0 must be at least 1".into()));
        }
        if min_jumps == 1 {
            // every path to n ≥ 1 jumps at least once
            return Ok(self.log_z[n]);
        }
        if min_jumps <= self.max_jumps {
            return Ok(self.log_at_least(min_jumps, n));
        }
        if self.max_jumps >= n {
            return Ok(LOG_ZERO);
        }
        Err(PinError::Truncated {
            requested: min_jumps,
            max_jumps: self.max_jumps,
            n,
        })
    }

    /// `P_n(E_{n,N}) = H_{N,n} / Z_n`.
    pub fn event_probability(&self, n: usize, min_jumps: usize) -> Result<f64> {
        let log_event = self.event_restricted(n, min_jumps)?;
        if self.log_z[n] == LOG_ZERO {
            return Err(PinError::ZeroPartition(n));
        }
        Ok((log_event - self.log_z[n]).exp().min(1.0))
    }

    /// Law of the jump count under `P_n`: entry `N` is `G_{N,n} / Z_n`.
    /// Normalised by the column sum, so it sums to one up to rounding.
    pub fn contact_distribution(&self, n: usize) -> Result<Vec<f64>> {
        self.check_site(n)?;
        if self.max_jumps < n {
            return Err(PinError::Truncated {
                requested: n,
                max_jumps: self.max_jumps,
                n,
            });
        }
        let total = self.column_sum(n);
        if total == LOG_ZERO || n == 0 {
            return Err(PinError::ZeroPartition(n));
        }
        Ok((0..=n).map(|level| (self.log_g(level, n) - total).exp()).collect())
    }

    fn check_site(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.horizon {
            return Err(PinError::OutOfRange {
                index: n,
                min: 1,
                max: self.horizon,
            });
        }
        Ok(())
    }
}
