//! Inter-arrival laws `K(n)` on `{1, 2, ...}`.
//!
//! Every law is tabulated up to a user-chosen horizon `n_table`, in both the
//! linear and the log domain, together with its tail `K̄(m) = Σ_{l≥m} K(l)` for
//! `1 ≤ m ≤ n_table + 1`. Mass beyond the table is carried by the analytic tail
//! at `n_table + 1`; engines never extrapolate `K` past the table.

use serde::{Deserialize, Serialize};
use std::hash::Hasher;

use crate::error::{PinError, Result};
use crate::logspace::LOG_ZERO;
use crate::rng::PinRng;

/// Cut-over between explicit partial sums and the Euler-Maclaurin remainder
/// when summing `n^{-s}`.
const ZETA_PARTIAL_TERMS: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum LawFamily {
    /// `K(n) ∝ n^{-(1+α)}`, `α > 0`.
    PowerLaw { alpha: f64 },
    /// First return time of the simple random walk to the origin (`α = 1/2`).
    SimpleRandomWalkReturn,
    /// `K(n) = p (1-p)^{n-1}`. Exponential tail, so it has no finite
    /// regular-variation exponent; meant for closed-form oracles only.
    Geometric { p: f64 },
}

impl LawFamily {
    pub fn name(&self) -> &'static str {
        match self {
            LawFamily::PowerLaw { .. } => "PowerLaw",
            LawFamily::SimpleRandomWalkReturn => "SimpleRandomWalkReturn",
            LawFamily::Geometric { .. } => "Geometric",
        }
    }

    /// Regular-variation exponent, `None` for the geometric family.
    pub fn alpha(&self) -> Option<f64> {
        match *self {
            LawFamily::PowerLaw { alpha } => Some(alpha),
            LawFamily::SimpleRandomWalkReturn => Some(0.5),
            LawFamily::Geometric { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            LawFamily::PowerLaw { alpha } if !(alpha > 0.0 && alpha.is_finite()) => Err(
                PinError::InvalidParameter(format!("power-law exponent must be positive, got {alpha}")),
            ),
            LawFamily::Geometric { p } if !(p > 0.0 && p < 1.0) => Err(PinError::InvalidParameter(
                format!("geometric success probability must lie in (0, 1), got {p}"),
            )),
            _ => Ok(()),
        }
    }
}

/// Text form used by config files and flags: `powerlaw:<alpha>`, `srw`,
/// `geometric:<p>`.
impl std::str::FromStr for LawFamily {
    type Err = PinError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let number = |what: &str| -> Result<f64> {
            let a = arg.ok_or_else(|| PinError::Config(format!("law `{name}` needs `{name}:<{what}>`")))?;
            a.parse()
                .map_err(|_| PinError::Config(format!("law `{s}`: `{a}` is not a number")))
        };
        let family = match name.to_ascii_lowercase().as_str() {
            "powerlaw" | "power" => LawFamily::PowerLaw { alpha: number("alpha")? },
            "srw" | "simplerandomwalkreturn" if arg.is_none() => LawFamily::SimpleRandomWalkReturn,
            "geometric" | "geom" => LawFamily::Geometric { p: number("p")? },
            _ => return Err(PinError::Config(format!("unknown law `{s}`"))),
        };
        family.validate()?;
        Ok(family)
    }
}

impl std::fmt::Display for LawFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LawFamily::PowerLaw { alpha } => write!(f, "powerlaw:{alpha}"),
            LawFamily::SimpleRandomWalkReturn => write!(f, "srw"),
            LawFamily::Geometric { p } => write!(f, "geometric:{p}"),
        }
    }
}

/// What is needed to rebuild a law bit-exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawSpec {
    #[serde(flatten)]
    pub family: LawFamily,
    pub n_table: usize,
}

impl LawSpec {
    pub fn build(&self) -> Result<RenewalLaw> {
        RenewalLaw::build(self.family, self.n_table)
    }
}

/// Audit record: the spec plus a checksum of the tabulated masses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawRecord {
    #[serde(flatten)]
    pub spec: LawSpec,
    pub satisfies_regvar: bool,
    pub mass_checksum: String,
}

#[derive(Clone, Debug)]
pub struct RenewalLaw {
    spec: LawSpec,
    /// index 0 unused
    mass: Vec<f64>,
    log_mass: Vec<f64>,
    /// index 0 unused, valid for 1..=n_table+1
    tail: Vec<f64>,
    log_tail: Vec<f64>,
}

impl RenewalLaw {
    pub fn build(family: LawFamily, n_table: usize) -> Result<Self> {
        family.validate()?;
        if n_table < 2 {
            return Err(PinError::InvalidParameter(format!(
                "n_table must be at least 2, got {n_table}"
            )));
        }
        let (log_mass, log_tail) = match family {
            LawFamily::PowerLaw { alpha } => power_law_tables(1.0 + alpha, n_table),
            LawFamily::SimpleRandomWalkReturn => srw_tables(n_table),
            LawFamily::Geometric { p } => geometric_tables(p, n_table),
        };
        let mut mass: Vec<f64> = log_mass.iter().map(|x| x.exp()).collect();
        let mut tail: Vec<f64> = log_tail.iter().map(|x| x.exp()).collect();
        if family == LawFamily::SimpleRandomWalkReturn {
            // keep the dyadic rationals exact
            let (m, t) = srw_linear(n_table);
            mass = m;
            tail = t;
        }
        Ok(Self {
            spec: LawSpec { family, n_table },
            mass,
            log_mass,
            tail,
            log_tail,
        })
    }

    pub fn spec(&self) -> LawSpec {
        self.spec
    }

    pub fn family(&self) -> LawFamily {
        self.spec.family
    }

    pub fn n_table(&self) -> usize {
        self.spec.n_table
    }

    pub fn alpha(&self) -> Option<f64> {
        self.spec.family.alpha()
    }

    pub fn satisfies_regvar(&self) -> bool {
        !matches!(self.spec.family, LawFamily::Geometric { .. })
    }

    /// `K(n)` for `1 ≤ n ≤ n_table`.
    pub fn mass(&self, n: usize) -> Result<f64> {
        self.check_mass_index(n)?;
        Ok(self.mass[n])
    }

    pub fn log_mass(&self, n: usize) -> Result<f64> {
        self.check_mass_index(n)?;
        Ok(self.log_mass[n])
    }

    /// `K̄(m)` for `1 ≤ m ≤ n_table + 1`.
    pub fn tail(&self, m: usize) -> Result<f64> {
        self.check_tail_index(m)?;
        Ok(self.tail[m])
    }

    pub fn log_tail(&self, m: usize) -> Result<f64> {
        self.check_tail_index(m)?;
        Ok(self.log_tail[m])
    }

    /// `ln K(0..=n_table)`, with `ln K(0) = -∞`.
    pub fn log_mass_table(&self) -> &[f64] {
        &self.log_mass
    }

    /// `ln K̄(0..=n_table+1)`; entry 0 is unused and set to `0`.
    pub fn log_tail_table(&self) -> &[f64] {
        &self.log_tail
    }

    pub fn mass_table(&self) -> &[f64] {
        &self.mass[1..]
    }

    /// `-ln K(n) / ln n`, which tends to `1 + α` under regular variation.
    pub fn regvar_exponent_estimate(&self, n: usize) -> Result<f64> {
        Ok(-self.log_mass(n)? / (n as f64).ln())
    }

    /// Inverse-CDF draw through the tail table; beyond `n_table` the family's
    /// analytic tail is inverted instead.
    pub fn sample_gap(&self, rng: &mut PinRng) -> usize {
        let v = rng.uniform_open();
        let n_table = self.spec.n_table;
        if v <= self.tail[n_table + 1] {
            return self.sample_beyond_table(v);
        }
        // smallest n with K̄(n + 1) < v; K̄(1) = 1 ≥ v
        let (mut lo, mut hi) = (1usize, n_table);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.tail[mid + 1] < v {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    fn sample_beyond_table(&self, v: f64) -> usize {
        let m = self.spec.n_table + 1;
        let draw = match self.spec.family {
            LawFamily::Geometric { p } => {
                // smallest n with (1-p)^n < v
                (v.ln() / (-p).ln_1p()).floor() + 1.0
            }
            LawFamily::PowerLaw { alpha } => {
                // continuous Pareto tail matched at m
                let ratio = v / self.tail[m];
                (m as f64 * ratio.powf(-1.0 / alpha)).floor()
            }
            LawFamily::SimpleRandomWalkReturn => {
                // K̄(2k + 1) = u_{2k} ≈ 1/sqrt(πk)
                let k = (1.0 / (std::f64::consts::PI * v * v)).ceil();
                2.0 * k
            }
        };
        let gap = if draw.is_finite() && draw < usize::MAX as f64 {
            draw as usize
        } else {
            usize::MAX
        };
        gap.max(m)
    }

    pub fn record(&self) -> LawRecord {
        LawRecord {
            spec: self.spec,
            satisfies_regvar: self.satisfies_regvar(),
            mass_checksum: format!("{:016x}", self.mass_checksum()),
        }
    }

    /// FNV-1a over the little-endian bytes of `K(1..=n_table)`.
    pub fn mass_checksum(&self) -> u64 {
        let mut h = fnv::FnvHasher::default();
        for m in &self.mass[1..] {
            h.write(&m.to_le_bytes());
        }
        h.finish()
    }

    fn check_mass_index(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.spec.n_table {
            return Err(PinError::OutOfRange {
                index: n,
                min: 1,
                max: self.spec.n_table,
            });
        }
        Ok(())
    }

    fn check_tail_index(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.spec.n_table + 1 {
            return Err(PinError::OutOfRange {
                index: m,
                min: 1,
                max: self.spec.n_table + 1,
            });
        }
        Ok(())
    }
}

fn geometric_tables(p: f64, n_table: usize) -> (Vec<f64>, Vec<f64>) {
    let log_q = (-p).ln_1p();
    let log_p = p.ln();
    let mut log_mass = vec![LOG_ZERO; n_table + 1];
    for (n, slot) in log_mass.iter_mut().enumerate().skip(1) {
        *slot = log_p + (n - 1) as f64 * log_q;
    }
    let mut log_tail = vec![0.0; n_table + 2];
    for (m, slot) in log_tail.iter_mut().enumerate().skip(1) {
        *slot = (m - 1) as f64 * log_q;
    }
    (log_mass, log_tail)
}

fn srw_tables(n_table: usize) -> (Vec<f64>, Vec<f64>) {
    // u_{2k} = P(S_{2k} = 0), K(2k) = u_{2k}/(2k-1), K̄(2k+1) = K̄(2k+2) = u_{2k}
    let u = srw_return_probabilities(n_table / 2 + 1);
    let mut log_mass = vec![LOG_ZERO; n_table + 1];
    for n in (2..=n_table).step_by(2) {
        let k = n / 2;
        log_mass[n] = u[k].ln() - ((2 * k - 1) as f64).ln();
    }
    let mut log_tail = vec![0.0; n_table + 2];
    for (m, slot) in log_tail.iter_mut().enumerate().skip(1) {
        *slot = u[(m - 1) / 2].ln();
    }
    (log_mass, log_tail)
}

fn srw_return_probabilities(kmax: usize) -> Vec<f64> {
    let mut u = Vec::with_capacity(kmax + 1);
    u.push(1.0f64);
    for k in 1..=kmax {
        let prev = u[k - 1];
        u.push(prev * (2 * k - 1) as f64 / (2 * k) as f64);
    }
    u
}

fn srw_linear(n_table: usize) -> (Vec<f64>, Vec<f64>) {
    let u = srw_return_probabilities(n_table / 2 + 1);
    let mut mass = vec![0.0; n_table + 1];
    for n in (2..=n_table).step_by(2) {
        mass[n] = u[n / 2] / (n - 1) as f64;
    }
    let mut tail = vec![1.0; n_table + 2];
    for (m, slot) in tail.iter_mut().enumerate().skip(1) {
        *slot = u[(m - 1) / 2];
    }
    (mass, tail)
}

fn power_law_tables(s: f64, n_table: usize) -> (Vec<f64>, Vec<f64>) {
    let zeta = power_sum_from(s, 1);
    let log_zeta = zeta.ln();
    let mut log_mass = vec![LOG_ZERO; n_table + 1];
    for (n, slot) in log_mass.iter_mut().enumerate().skip(1) {
        *slot = -s * (n as f64).ln() - log_zeta;
    }
    let mut tail = vec![0.0; n_table + 2];
    tail[n_table + 1] = power_sum_from(s, n_table + 1) / zeta;
    for m in (1..=n_table).rev() {
        tail[m] = tail[m + 1] + log_mass[m].exp();
    }
    let mut log_tail: Vec<f64> = tail.iter().map(|t| t.ln()).collect();
    log_tail[0] = 0.0;
    (log_mass, log_tail)
}

/// `Σ_{n≥start} n^{-s}` for `s > 1`: explicit terms up to the cut-over, then
/// the Euler-Maclaurin remainder through the fifth derivative.
pub(crate) fn power_sum_from(s: f64, start: usize) -> f64 {
    let cut = start.max(ZETA_PARTIAL_TERMS);
    // add smallest terms first
    let mut sum = euler_maclaurin_remainder(s, cut as f64);
    for n in (start..cut).rev() {
        sum += (n as f64).powf(-s);
    }
    sum
}

fn euler_maclaurin_remainder(s: f64, n: f64) -> f64 {
    let f = n.powf(-s);
    let integral = n * f / (s - 1.0);
    let d1 = s * f / n;
    let d3 = s * (s + 1.0) * (s + 2.0) * f / (n * n * n);
    let d5 = d3 * (s + 3.0) * (s + 4.0) / (n * n);
    integral + 0.5 * f + d1 / 12.0 - d3 / 720.0 + d5 / 30240.0
}
