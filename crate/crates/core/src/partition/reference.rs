use super::check_horizon;
use super::kernel::{Split, TiltedKernel};
use crate::environment::{Environment, ModelParams};
use crate::error::Result;
use crate::logspace::LOG_ZERO;
use crate::renewal::RenewalLaw;

/// `ln Z_n` for `n = 0..=horizon` from the last-jump recursion
/// `Z_n = Σ_{j<n} Z_j e^{βω_j - h} K(n - j)`, every sum in log domain. `O(L²)`.
pub fn compute_constrained(
    env: &Environment,
    law: &RenewalLaw,
    params: &ModelParams,
    horizon: usize,
) -> Result<Vec<f64>> {
    Ok(constrained_split(env, law, params, horizon)?.iter().map(|z| z.value()).collect())
}

pub(crate) fn constrained_split(
    env: &Environment,
    law: &RenewalLaw,
    params: &ModelParams,
    horizon: usize,
) -> Result<Vec<Split>> {
    check_horizon(env, law, horizon)?;
    let log_w = env.log_weights(params, horizon);
    let log_k = law.log_mass_table();
    let mut z = vec![Split::ZERO; horizon + 1];
    // a[j] = Z_j e^{βω_j - h}, with a plain copy for locating the largest term
    let mut a = vec![Split::ZERO; horizon];
    let mut approx = vec![LOG_ZERO; horizon];
    z[0] = Split::ONE;
    a[0] = Split::ONE.add(log_w[0]);
    approx[0] = a[0].value();
    for n in 1..=horizon {
        let (mut top, mut r) = (LOG_ZERO, 0);
        for j in 0..n {
            let t = approx[j] + log_k[n - j];
            if t > top {
                top = t;
                r = j;
            }
        }
        if top > LOG_ZERO {
            let base = log_k[n - r];
            let sum: f64 = (0..n)
                .filter(|&j| !a[j].is_zero())
                .map(|j| (a[j].diff(a[r]) + (log_k[n - j] - base)).exp())
                .sum();
            z[n] = a[r].add(base + sum.ln());
        }
        if n < horizon {
            a[n] = z[n].add(log_w[n]);
            approx[n] = a[n].value();
        }
    }
    Ok(z)
}

/// `ln Z_{n,f}` for `n = 0..=horizon`, with `Z_{0,f} = 1`.
pub fn compute_free(
    env: &Environment,
    law: &RenewalLaw,
    params: &ModelParams,
    horizon: usize,
) -> Result<Vec<f64>> {
    let z = constrained_split(env, law, params, horizon)?;
    Ok(free_from_constrained(env, law, params, &z))
}

pub(crate) fn free_from_constrained(env: &Environment, law: &RenewalLaw, params: &ModelParams, z: &[Split]) -> Vec<f64> {
    let horizon = z.len() - 1;
    let log_w = env.log_weights(params, horizon);
    let input: Vec<Split> = (0..horizon).map(|j| z[j].add(log_w[j])).collect();
    let kernel = TiltedKernel::new(law.log_tail_table(), horizon);
    let mut out = vec![0.0];
    out.extend(kernel.convolve(&input, 1, horizon).iter().map(|x| x.value()));
    out
}
