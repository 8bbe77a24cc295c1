//! Online `Z_n` by offset-banded relaxed convolution.
//!
//! `Z_n = Σ_{m≥1} K(m) a_{n-m}` with `a_j = Z_j e^{βω_j - h}`. Offsets below
//! [`NEAR`] are summed directly in log domain as soon as `a_{n-1}` is known.
//! Offsets in the band `[s, 2s)`, `s = 2^t`, only reach back to `a_j` with
//! `j ≤ n - s`, so the band's contribution to the output block `[b, b + s)`
//! (`b` a multiple of `s`) is ready once `a_{b-1}` is known. Each such block is
//! one FFT middle product of size `2s` between the input segment
//! `a_{b-2s+1..b}` and the kernel band.
//!
//! Inside a transform the segment and the kernel band are exponentially tilted
//! by the band's chord slope and divided by their maxima, so values are in
//! `[0, 1]`. FFT round-off is then bounded relative to `Z_n`, which is at least
//! as large as any single term `a_j K(n - j)` reachable from the segment. The
//! accumulated round-off bound is reported with the result.
//!
//! Laws supported on a sublattice `dℤ` (the random-walk return law) are
//! first compressed to `ℤ`.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::check_horizon;
use crate::environment::{Environment, ModelParams};
use crate::error::Result;
use crate::logspace::{log_add, LogAccumulator, LOG_ZERO};
use crate::renewal::RenewalLaw;

const NEAR_BITS: u32 = 5;
const NEAR: usize = 1 << NEAR_BITS;
/// Constant in the FFT convolution error bound `c ε log₂(P) ‖x‖₂ ‖y‖₂`.
const FFT_ERROR_CONSTANT: f64 = 3.0;

#[derive(Clone, Debug)]
pub struct FastOutcome {
    pub log_z: Vec<f64>,
    /// Largest certified relative round-off bound over all `n` with `Z_n > 0`.
    pub error_bound: f64,
    /// Lattice period of the law's support used for compression.
    pub period: usize,
}

pub fn compute_constrained_fast(
    env: &Environment,
    law: &RenewalLaw,
    params: &ModelParams,
    horizon: usize,
) -> Result<FastOutcome> {
    check_horizon(env, law, horizon)?;
    let log_k = law.log_mass_table();
    let log_w = env.log_weights(params, horizon);
    let period = (1..=horizon)
        .filter(|&m| log_k[m] > LOG_ZERO)
        .fold(0usize, gcd);
    let mut log_z = vec![LOG_ZERO; horizon + 1];
    log_z[0] = 0.0;
    if period == 0 {
        return Ok(FastOutcome { log_z, error_bound: 0.0, period: 1 });
    }
    let len = horizon / period;
    let k_c: Vec<f64> = (0..=len).map(|m| if m == 0 { LOG_ZERO } else { log_k[m * period] }).collect();
    let w_c: Vec<f64> = (0..len).map(|k| log_w[k * period]).collect();
    let (z_c, error_bound) = relaxed(&k_c, &w_c);
    for (k, v) in z_c.into_iter().enumerate() {
        log_z[k * period] = v;
    }
    Ok(FastOutcome { log_z, error_bound, period })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

struct Band {
    half: usize,
    log_tilt: f64,
    log_scale: f64,
    /// FFT of the tilted, normalised kernel band, length `2 * half`
    spectrum: Vec<Complex<f64>>,
    kernel_norm: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Core recursion on a compressed lattice: `log_k[1..=len]`, `log_w[0..len]`.
fn relaxed(log_k: &[f64], log_w: &[f64]) -> (Vec<f64>, f64) {
    let len = log_w.len();
    let mut log_z = vec![LOG_ZERO; len + 1];
    let mut log_a = vec![LOG_ZERO; len];
    let mut acc = vec![LogAccumulator::new(); len + 1];
    let mut noise = vec![LOG_ZERO; len + 1];
    log_z[0] = 0.0;
    log_a[0] = log_w[0];

    let mut planner = FftPlanner::<f64>::new();
    let mut bands: Vec<Band> = Vec::new();
    let mut t = NEAR_BITS;
    while (1usize << t) <= len {
        bands.push(make_band(log_k, 1 << t, len, &mut planner));
        t += 1;
    }
    let mut scratch = Vec::new();

    for n in 1..=len {
        let acc_n = &mut acc[n];
        for m in 1..NEAR.min(n + 1) {
            acc_n.push(log_a[n - m] + log_k[m]);
        }
        log_z[n] = acc_n.value();
        if n == len {
            break;
        }
        log_a[n] = log_z[n] + log_w[n];
        let b = n + 1;
        for band in &bands {
            if b % band.half != 0 {
                continue;
            }
            apply_band(band, b, &log_a, &mut acc, &mut noise, &mut scratch);
        }
    }

    let error_bound = (1..=len)
        .filter(|&n| log_z[n] > LOG_ZERO && noise[n] > LOG_ZERO)
        .map(|n| (noise[n] - log_z[n]).exp())
        .fold(0.0, f64::max);
    (log_z, error_bound)
}

fn make_band(log_k: &[f64], half: usize, len: usize, planner: &mut FftPlanner<f64>) -> Band {
    let size = 2 * half;
    let lo = half;
    let hi = (2 * half - 1).min(len);
    let log_tilt = if hi > lo && log_k[lo] > LOG_ZERO && log_k[hi] > LOG_ZERO {
        ((log_k[lo] - log_k[hi]) / (hi - lo) as f64).max(0.0)
    } else {
        0.0
    };
    let log_scale = (lo..=hi)
        .map(|m| log_k[m] + m as f64 * log_tilt)
        .fold(LOG_ZERO, f64::max);
    let mut spectrum = vec![Complex::new(0.0, 0.0); size];
    let mut norm2 = 0.0;
    for m in lo..=hi {
        let v = (log_k[m] + m as f64 * log_tilt - log_scale).exp();
        spectrum[m - lo] = Complex::new(v, 0.0);
        norm2 += v * v;
    }
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    forward.process(&mut spectrum);
    Band {
        half,
        log_tilt,
        log_scale,
        spectrum,
        kernel_norm: norm2.sqrt(),
        forward,
        inverse,
    }
}

fn apply_band(
    band: &Band,
    b: usize,
    log_a: &[f64],
    acc: &mut [LogAccumulator],
    noise: &mut [f64],
    scratch: &mut Vec<Complex<f64>>,
) {
    let s = band.half;
    let size = 2 * s;
    let len = acc.len() - 1;
    // segment j = b - 2s + 1 ..= b - 1 sits at i = j - (b - 2s + 1)
    let seg_start = b as isize - size as isize + 1;
    let tilted = |i: usize| -> f64 {
        let j = seg_start + i as isize;
        if j < 0 {
            LOG_ZERO
        } else {
            log_a[j as usize] + j as f64 * band.log_tilt
        }
    };
    let seg_max = (0..size - 1).map(tilted).fold(LOG_ZERO, f64::max);
    if seg_max == LOG_ZERO {
        return;
    }
    scratch.clear();
    scratch.resize(size, Complex::new(0.0, 0.0));
    let mut norm2 = 0.0;
    for (i, slot) in scratch.iter_mut().enumerate().take(size - 1) {
        let v = (tilted(i) - seg_max).exp();
        *slot = Complex::new(v, 0.0);
        norm2 += v * v;
    }
    band.forward.process(scratch);
    for (x, y) in scratch.iter_mut().zip(&band.spectrum) {
        *x *= y;
    }
    band.inverse.process(scratch);
    let inv = 1.0 / size as f64;
    let noise_lin =
        FFT_ERROR_CONSTANT * f64::EPSILON * (size as f64).log2() * norm2.sqrt() * band.kernel_norm;
    let log_noise = noise_lin.ln();
    for n in b..(b + s).min(len + 1) {
        let q = n - b + s - 1;
        let v = scratch[q].re * inv;
        let shift = seg_max + band.log_scale - n as f64 * band.log_tilt;
        if v > 0.0 {
            acc[n].push(v.ln() + shift);
        }
        noise[n] = log_add(noise[n], log_noise + shift);
    }
}
