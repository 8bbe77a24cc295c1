//! Independent oracles: closed-form laws and exhaustive path enumeration in
//! plain linear arithmetic.
#![allow(dead_code)]

use pinlab::rng::PinRng;
use pinlab::{ChargeDist, Environment, LawFamily, ModelParams, RenewalLaw};

/// `Σ_{l≥m} l^{-s}`: direct terms up to 10^5, then Euler-Maclaurin.
pub fn hurwitz_tail(s: f64, m: usize) -> f64 {
    let cut = 100_000usize.max(m);
    // Neumaier summation, smallest terms first
    let (mut direct, mut carry) = (0.0f64, 0.0f64);
    for l in (m..cut).rev() {
        let x = (l as f64).powf(-s);
        let t = direct + x;
        carry += if direct.abs() >= x.abs() { (direct - t) + x } else { (x - t) + direct };
        direct = t;
    }
    let direct = direct + carry;
    let a = cut as f64;
    let rest = a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s) + s * a.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * a.powf(-s - 3.0) / 720.0;
    direct + rest
}

/// `C(2k, k) / 4^k` by repeated products.
pub fn central_binomial_ratio(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (2 * i - 1) as f64 / (2 * i) as f64)
}

pub fn oracle_mass(family: LawFamily, n: usize) -> f64 {
    match family {
        LawFamily::PowerLaw { alpha } => (n as f64).powf(-(1.0 + alpha)) / hurwitz_tail(1.0 + alpha, 1),
        LawFamily::SimpleRandomWalkReturn => {
            if n % 2 == 1 {
                0.0
            } else {
                central_binomial_ratio(n / 2) / (n - 1) as f64
            }
        }
        LawFamily::Geometric { p } => p * (1.0 - p).powi(n as i32 - 1),
    }
}

/// `K(0..=n)` with `K(0) = 0`, normalising once.
pub fn oracle_masses(family: LawFamily, n: usize) -> Vec<f64> {
    let norm = match family {
        LawFamily::PowerLaw { alpha } => hurwitz_tail(1.0 + alpha, 1),
        _ => 1.0,
    };
    (0..=n)
        .map(|m| match family {
            _ if m == 0 => 0.0,
            LawFamily::PowerLaw { alpha } => (m as f64).powf(-(1.0 + alpha)) / norm,
            _ => oracle_mass(family, m),
        })
        .collect()
}

/// `K̄(m) = Σ_{l≥m} K(l)` for `m ≥ 1`.
pub fn oracle_tail(family: LawFamily, m: usize) -> f64 {
    match family {
        LawFamily::PowerLaw { alpha } => hurwitz_tail(1.0 + alpha, m) / hurwitz_tail(1.0 + alpha, 1),
        LawFamily::SimpleRandomWalkReturn => {
            // K̄(2k + 1) = K̄(2k + 2) = C(2k, k) / 4^k
            let k = (m - 1) / 2;
            central_binomial_ratio(k)
        }
        LawFamily::Geometric { p } => (1.0 - p).powi(m as i32 - 1),
    }
}

/// Sums over every contact set in `[0, n]`, kept separately by jump count.
pub struct Enumeration {
    pub n: usize,
    /// `by_jumps[N]` = total weight of paths ending at `n` with `N` jumps
    pub by_jumps: Vec<f64>,
    pub free: f64,
    /// every path ending at `n` with its weight
    pub paths: Vec<(Vec<usize>, f64)>,
}

impl Enumeration {
    pub fn z(&self) -> f64 {
        self.by_jumps.iter().sum()
    }

    pub fn at_least(&self, min_jumps: usize) -> f64 {
        self.by_jumps.iter().skip(min_jumps).sum()
    }
}

/// All `2^{n-1}` contact sets, `n ≤ 20`.
pub fn enumerate(family: LawFamily, charges: &[f64], params: ModelParams, n: usize) -> Enumeration {
    enumerate_with(&OracleLaw::new(family, n), charges, params, n)
}

/// `K` and `K̄` tabulated once, for repeated enumerations.
pub struct OracleLaw {
    pub k: Vec<f64>,
    pub kbar: Vec<f64>,
}

impl OracleLaw {
    pub fn new(family: LawFamily, n: usize) -> Self {
        Self {
            k: oracle_masses(family, n),
            kbar: (0..=n).map(|m| if m == 0 { 1.0 } else { oracle_tail(family, m) }).collect(),
        }
    }
}

pub fn enumerate_with(law: &OracleLaw, charges: &[f64], params: ModelParams, n: usize) -> Enumeration {
    assert!((1..=20).contains(&n) && law.k.len() > n);
    let w: Vec<f64> = charges.iter().map(|&c| (params.beta * c - params.h).exp()).collect();
    let (k, kbar) = (&law.k, &law.kbar);
    let mut by_jumps = vec![0.0; n + 1];
    let mut paths = Vec::new();
    let mut free = 0.0;
    for mask in 0u32..(1 << (n - 1)) {
        let mut points = vec![0usize];
        points.extend((1..n).filter(|&i| mask >> (i - 1) & 1 == 1));
        // interior weight shared by the constrained and free sums
        let mut weight = 1.0;
        for pair in points.windows(2) {
            weight *= k[pair[1] - pair[0]] * w[pair[0]];
        }
        let last = *points.last().unwrap();
        free += weight * w[last] * kbar[n - last];
        let constrained = weight * k[n - last] * w[last];
        points.push(n);
        by_jumps[points.len() - 1] += constrained;
        paths.push((points, constrained));
    }
    Enumeration { n, by_jumps, free, paths }
}

/// Relative difference of two non-negative reals; two zeros agree.
pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Relative difference between a log-domain value and a linear oracle.
pub fn rel_log(log_value: f64, oracle: f64) -> f64 {
    if oracle == 0.0 {
        return if log_value == f64::NEG_INFINITY { 0.0 } else { 1.0 };
    }
    (log_value - oracle.ln()).exp_m1().abs()
}

pub struct RandomCase {
    pub family: LawFamily,
    pub dist: ChargeDist,
    pub params: ModelParams,
    pub seed: u64,
}

impl RandomCase {
    pub fn draw(rng: &mut PinRng) -> Self {
        let family = match rng.next_u64() % 3 {
            0 => LawFamily::PowerLaw { alpha: 0.1 + 2.9 * rng.uniform() },
            1 => LawFamily::SimpleRandomWalkReturn,
            _ => LawFamily::Geometric { p: 0.05 + 0.9 * rng.uniform() },
        };
        let dist = match rng.next_u64() % 3 {
            0 => ChargeDist::StandardGaussian,
            1 => ChargeDist::Rademacher,
            _ => ChargeDist::unit_uniform(),
        };
        let params = ModelParams::new(2.0 * rng.uniform(), -1.0 + 3.0 * rng.uniform()).unwrap();
        Self { family, dist, params, seed: rng.next_u64() }
    }

    pub fn build(&self, horizon: usize) -> (Environment, RenewalLaw) {
        (
            Environment::generate(self.dist, self.seed, horizon).unwrap(),
            RenewalLaw::build(self.family, horizon.max(2)).unwrap(),
        )
    }
}

/// Upper tail `P(X ≥ k)` of a chi-square law with `dof` degrees of freedom.
pub fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    1.0 - ChiSquared::new(dof as f64).unwrap().cdf(statistic)
}

/// Pearson statistic over cells with expected count at least 5; the rest
/// are pooled into one cell. Returns `(statistic, degrees of freedom)`.
pub fn pearson(observed: &[u64], expected_prob: &[f64], total: u64) -> (f64, usize) {
    let total = total as f64;
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pooled_o, mut pooled_e) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected_prob) {
        let e = p * total;
        if e >= 5.0 {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        } else {
            pooled_o += o as f64;
            pooled_e += e;
        }
    }
    if pooled_e > 0.0 {
        stat += (pooled_o - pooled_e).powi(2) / pooled_e;
        cells += 1;
    }
    (stat, cells.saturating_sub(1))
}
