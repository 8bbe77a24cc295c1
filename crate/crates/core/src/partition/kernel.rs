//! Convolution of a fully known log-domain sequence with a tabulated kernel:
//! `out(n) = ln Σ_{j<n} e^{x_j} k(n - j)`.
//!
//! Inputs are grouped in chunks that each carry their own exponent, so the
//! inner products run in linear arithmetic on mantissas in `[0, 1]`. The kernel
//! is exponentially tilted (`k(m) λ^m`, with `x_j` tilted by `λ^j` to match) so
//! that geometric kernels become flat and never underflow.

use crate::logspace::LOG_ZERO;

const CHUNK: usize = 64;

/// A log value kept as `hi + lo` with `hi` an integer. Differences of `hi`
/// parts are exact, so recursions that add a weight per step round at the
/// scale of `lo` instead of at the scale of the whole logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Split {
    hi: f64,
    lo: f64,
}

impl Split {
    pub(crate) const ZERO: Split = Split { hi: LOG_ZERO, lo: 0.0 };
    pub(crate) const ONE: Split = Split { hi: 0.0, lo: 0.0 };

    #[cfg(test)]
    pub(crate) fn new(x: f64) -> Self {
        if x == LOG_ZERO {
            return Self::ZERO;
        }
        let hi = x.round();
        Self { hi, lo: x - hi }
    }

    /// `self + d` in log domain, i.e. the value times `e^d`.
    #[inline]
    pub(crate) fn add(self, d: f64) -> Self {
        if self.hi == LOG_ZERO || d == LOG_ZERO {
            return Self::ZERO;
        }
        let lo = self.lo + d;
        let r = lo.round();
        Self { hi: self.hi + r, lo: lo - r }
    }

    /// `self - other` as a plain logarithm; `other` must be non-zero.
    #[inline]
    pub(crate) fn diff(self, other: Split) -> f64 {
        (self.hi - other.hi) + (self.lo - other.lo)
    }

    #[inline]
    pub(crate) fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub(crate) fn is_zero(self) -> bool {
        self.hi == LOG_ZERO
    }
}

pub(crate) struct TiltedKernel {
    log_tilt: f64,
    log_scale: f64,
    /// `rev[max_offset - m] = k(m) λ^m e^{-scale}` for `1 ≤ m ≤ max_offset`
    rev: Vec<f64>,
    max_offset: usize,
}

impl TiltedKernel {
    /// `log_values[m]` is `ln k(m)`; index 0 is ignored.
    pub(crate) fn new(log_values: &[f64], max_offset: usize) -> Self {
        assert!(max_offset >= 1 && max_offset < log_values.len());
        let finite: Vec<usize> = (1..=max_offset).filter(|&m| log_values[m] > LOG_ZERO).collect();
        let log_tilt = match (finite.first(), finite.last()) {
            (Some(&a), Some(&b)) if b > a => ((log_values[a] - log_values[b]) / (b - a) as f64).max(0.0),
            _ => 0.0,
        };
        let log_scale = (1..=max_offset)
            .map(|m| log_values[m] + m as f64 * log_tilt)
            .fold(LOG_ZERO, f64::max);
        let mut rev = vec![0.0; max_offset];
        for m in 1..=max_offset {
            rev[max_offset - m] = (log_values[m] + m as f64 * log_tilt - log_scale).exp();
        }
        Self {
            log_tilt,
            log_scale,
            rev,
            max_offset,
        }
    }

    /// Returns `out(n)` for `n` in `first..=last`. Requires `last ≤ max_offset`
    /// whenever an input at `j = 0` is non-zero.
    pub(crate) fn convolve(&self, input: &[Split], first: usize, last: usize) -> Vec<Split> {
        let mut out = vec![Split::ZERO; last + 1 - first];
        let Some(j0) = input.iter().position(|x| !x.is_zero()) else {
            return out;
        };
        let len = input.len();
        let tilt = self.log_tilt;
        // tilted height of j over a, with small terms only
        let height = |j: usize, a: usize| input[j].diff(input[a]) + (j as f64 - a as f64) * tilt;
        // each chunk is anchored at its highest tilted entry
        let n_chunks = len.div_ceil(CHUNK);
        let anchors: Vec<Option<usize>> = (0..n_chunks)
            .map(|c| {
                (c * CHUNK..((c + 1) * CHUNK).min(len))
                    .filter(|&j| !input[j].is_zero())
                    .max_by(|&a, &b| height(a, b).partial_cmp(&0.0).unwrap())
            })
            .collect();
        let mantissa: Vec<f64> = (0..len)
            .map(|j| match anchors[j / CHUNK] {
                Some(a) if !input[j].is_zero() => height(j, a).exp(),
                _ => 0.0,
            })
            .collect();
        let rel = |c: usize, r: usize| height(anchors[c].unwrap(), anchors[r].unwrap());

        // scaled[j] = e^{height(j) - height(reference anchor)}, rebuilt
        // whenever the reference chunk moves up
        let mut scaled = vec![0.0; len];
        let mut reference: Option<usize> = None;
        let mut filled = 0usize; // chunks already written into `scaled`

        for n in first.max(j0 + 1)..=last {
            let jend = n.min(len);
            let needed = jend.div_ceil(CHUNK);
            if needed > filled {
                let mut moved = false;
                for c in filled..needed {
                    if anchors[c].is_some() && reference.is_none_or(|r| rel(c, r) > 0.0) {
                        reference = Some(c);
                        moved = true;
                    }
                }
                let start_chunk = if moved { 0 } else { filled };
                if let Some(r) = reference {
                    for c in start_chunk..needed {
                        let f = if anchors[c].is_some() { rel(c, r).exp() } else { 0.0 };
                        let hi = ((c + 1) * CHUNK).min(len);
                        for j in c * CHUNK..hi {
                            scaled[j] = mantissa[j] * f;
                        }
                    }
                }
                filled = needed;
            }
            let Some(r) = reference else { continue };
            debug_assert!(n <= self.max_offset || j0 > 0 || n - j0 <= self.max_offset);
            let lo = j0.max(n.saturating_sub(self.max_offset));
            let kstart = self.max_offset + lo - n;
            let s = dot(&scaled[lo..jend], &self.rev[kstart..kstart + (jend - lo)]);
            if s > 0.0 {
                let a = anchors[r].unwrap();
                out[n - first] = input[a].add(s.ln() + self.log_scale - (n as f64 - a as f64) * tilt);
            }
        }
        out
    }

    /// Plain log-domain form of [`convolve`](Self::convolve).
    #[cfg(test)]
    fn convolve_log(&self, log_input: &[f64], first: usize, last: usize) -> Vec<f64> {
        let input: Vec<Split> = log_input.iter().map(|&x| Split::new(x)).collect();
        self.convolve(&input, first, last).iter().map(|x| x.value()).collect()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    let mut s = ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logspace::log_sum_exp;

    fn direct(log_input: &[f64], log_k: &[f64], n: usize) -> f64 {
        let terms: Vec<f64> = (0..n.min(log_input.len()))
            .filter(|&j| n - j < log_k.len())
            .map(|j| log_input[j] + log_k[n - j])
            .collect();
        log_sum_exp(&terms)
    }

    #[test]
    fn matches_direct_log_sum() {
        let m = 300;
        let mut log_k = vec![LOG_ZERO; m + 1];
        for (i, v) in log_k.iter_mut().enumerate().skip(1) {
            *v = -1.7 * (i as f64).ln() - 0.3;
        }
        // wildly varying input, including zeros and a large growth
        let input: Vec<f64> = (0..m)
            .map(|j| if j % 7 == 3 { LOG_ZERO } else { 0.9 * j as f64 * ((j as f64).sin()) })
            .collect();
        let kernel = TiltedKernel::new(&log_k, m);
        let out = kernel.convolve_log(&input, 1, m);
        for n in 1..=m {
            let d = direct(&input, &log_k, n);
            assert!((out[n - 1] - d).abs() < 1e-12 * d.abs().max(1.0), "n={n}: {} vs {d}", out[n - 1]);
        }
    }

    #[test]
    fn geometric_kernel_far_below_underflow() {
        // ln k(m) = -5m reaches -5000 at m = 1000
        let m = 1000;
        let mut log_k = vec![LOG_ZERO; m + 1];
        for (i, v) in log_k.iter_mut().enumerate().skip(1) {
            *v = -5.0 * i as f64;
        }
        let input = vec![0.0; m];
        let out = TiltedKernel::new(&log_k, m).convolve_log(&input, 1, m);
        for n in [1usize, 10, 500, 1000] {
            let d = direct(&input, &log_k, n);
            assert!((out[n - 1] - d).abs() < 1e-11 * d.abs(), "n={n}");
        }
    }

    #[test]
    fn leading_zeros_skipped() {
        let log_k = vec![LOG_ZERO, 0.0, 0.0, 0.0, 0.0];
        let input = vec![LOG_ZERO, LOG_ZERO, 1.0];
        let out = TiltedKernel::new(&log_k, 4).convolve_log(&input, 1, 4);
        assert_eq!(out[0], LOG_ZERO);
        assert_eq!(out[1], LOG_ZERO);
        assert!((out[2] - 1.0).abs() < 1e-15);
        assert!((out[3] - 1.0).abs() < 1e-15);
    }
}
