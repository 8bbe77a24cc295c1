//! Partition functions of the pinning model, in log domain.
//!
//! A path is a contact set `0 = l_0 < l_1 < ... < l_N = n`; its weight is
//! `Π_{i<N} K(l_{i+1} - l_i) e^{βω_{l_i} - h}`. Summing these weights gives
//!
//! * `Z_n`, over all paths ending at `n` (`Z_0 = 1`),
//! * `G_{N,n}`, over paths with exactly `N` jumps ending at `n`,
//! * `H_{N,n} = Σ_{N'≥N} G_{N',n}`, the weight of the event "at least `N` jumps",
//!   which is the event `|τ ∩ [0,n]| > N`,
//! * `Z_{n,f}`, the free partition function, by conditioning on the last contact
//!   before `n`: `Z_{n,f} = Σ_{j<n} Z_j e^{βω_j - h} K̄(n - j)`.
//!
//! `Z_0 = G_{0,0} = 1` and zero weights are `-∞`.

mod export;
mod fast;
mod kernel;
mod ladder;
mod reference;

pub use export::write_tables;
pub use fast::{compute_constrained_fast, FastOutcome};
pub use ladder::{compute_ladder, LadderTables};
pub use reference::{compute_constrained, compute_free};

use crate::environment::Environment;
use crate::error::{PinError, Result};
use crate::renewal::RenewalLaw;

pub const ENGINE_VERSION: &str = concat!("pinlab-", env!("CARGO_PKG_VERSION"));

/// Which implementation of `Z_n` to run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Reference,
    Fast,
}

impl Engine {
    pub fn constrained(
        self,
        env: &Environment,
        law: &RenewalLaw,
        params: &crate::ModelParams,
        horizon: usize,
    ) -> Result<Vec<f64>> {
        match self {
            Engine::Reference => compute_constrained(env, law, params, horizon),
            Engine::Fast => Ok(compute_constrained_fast(env, law, params, horizon)?.log_z),
        }
    }
}

pub(crate) fn check_horizon(env: &Environment, law: &RenewalLaw, horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(PinError::InvalidParameter("horizon must be positive".into()));
    }
    if horizon > env.len() {
        return Err(PinError::HorizonTooLarge {
            horizon,
            what: "environment length",
            available: env.len(),
        });
    }
    if horizon > law.n_table() {
        return Err(PinError::HorizonTooLarge {
            horizon,
            what: "law table",
            available: law.n_table(),
        });
    }
    Ok(())
}
