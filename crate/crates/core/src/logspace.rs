//! Log-domain arithmetic.
//!
//! A zero partition function is represented by `f64::NEG_INFINITY`, which every
//! helper here treats as the identity of log-addition.

/// Log of zero.
pub const LOG_ZERO: f64 = f64::NEG_INFINITY;

/// `ln(e^a + e^b)` without overflow; `LOG_ZERO` is the identity.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == LOG_ZERO {
        return b;
    }
    if b == LOG_ZERO {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Stable `ln Σ e^{x_i}`. Empty or all-`LOG_ZERO` input gives `LOG_ZERO`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(LOG_ZERO, f64::max);
    if max == LOG_ZERO {
        return LOG_ZERO;
    }
    if max.is_infinite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Streaming accumulator for `ln Σ e^{x_i}` that rescales as new maxima arrive.
#[derive(Clone, Copy, Debug)]
pub struct LogAccumulator {
    max: f64,
    sum: f64,
}

impl Default for LogAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl LogAccumulator {
    pub fn new() -> Self {
        Self { max: LOG_ZERO, sum: 0.0 }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        if x == LOG_ZERO {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == LOG_ZERO {
            LOG_ZERO
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Relative difference `|e^a - e^b| / max(e^a, e^b)` computed from logs.
/// Two zeros compare equal; a zero against a non-zero is a difference of 1.
pub fn log_relative_diff(a: f64, b: f64) -> f64 {
    if a == LOG_ZERO && b == LOG_ZERO {
        return 0.0;
    }
    if a == LOG_ZERO || b == LOG_ZERO {
        return 1.0;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    -(lo - hi).exp_m1()
}
