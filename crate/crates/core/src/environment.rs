//! Seeded charge sequences `ω` and model parameters.
//!
//! On-disk layout (all integers little-endian):
//!
//! ```text
//! "PINENV1"            7 bytes, the trailing '1' is the format version
//! dist tag             1 byte   0 = StandardGaussian, 1 = Rademacher, 2 = CenteredUniform
//! seed                 8 bytes  u64
//! length               8 bytes  u64
//! half width           8 bytes  f64, present only for tag 2
//! charges              8 * length bytes, IEEE-754 f64
//! checksum             8 bytes  FNV-1a 64 over the charge bytes
//! ```

use serde::{Deserialize, Serialize};
use std::hash::Hasher;
use std::io::Write;
use std::path::Path;

use crate::error::{PinError, Result};
use crate::rng::PinRng;

const MAGIC_PREFIX: &[u8; 6] = b"PINENV";
const FORMAT_VERSION: u8 = b'1';

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist")]
pub enum ChargeDist {
    StandardGaussian,
    Rademacher,
    CenteredUniform { half_width: f64 },
}

impl ChargeDist {
    /// Uniform on `[-√3, √3]`, unit variance.
    pub fn unit_uniform() -> Self {
        ChargeDist::CenteredUniform { half_width: 3f64.sqrt() }
    }

    fn tag(&self) -> u8 {
        match self {
            ChargeDist::StandardGaussian => 0,
            ChargeDist::Rademacher => 1,
            ChargeDist::CenteredUniform { .. } => 2,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            ChargeDist::StandardGaussian | ChargeDist::Rademacher => 1.0,
            ChargeDist::CenteredUniform { half_width } => half_width * half_width / 3.0,
        }
    }

    /// `ln E[e^{βω}]`.
    pub fn log_mgf(&self, beta: f64) -> f64 {
        match *self {
            ChargeDist::StandardGaussian => 0.5 * beta * beta,
            ChargeDist::Rademacher => log_cosh(beta),
            ChargeDist::CenteredUniform { half_width } => log_sinhc(half_width * beta),
        }
    }
}

/// Text form: `gaussian`, `rademacher`, `uniform` (unit variance) or
/// `uniform:<half_width>`.
impl std::str::FromStr for ChargeDist {
    type Err = PinError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("gaussian" | "normal", None) => Ok(ChargeDist::StandardGaussian),
            ("rademacher", None) => Ok(ChargeDist::Rademacher),
            ("uniform", None) => Ok(ChargeDist::unit_uniform()),
            ("uniform", Some(a)) => match a.parse::<f64>() {
                Ok(w) if w > 0.0 && w.is_finite() => Ok(ChargeDist::CenteredUniform { half_width: w }),
                _ => Err(PinError::Config(format!("uniform half width must be positive, got `{a}`"))),
            },
            _ => Err(PinError::Config(format!("unknown charge distribution `{s}`"))),
        }
    }
}

impl std::fmt::Display for ChargeDist {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChargeDist::StandardGaussian => write!(f, "gaussian"),
            ChargeDist::Rademacher => write!(f, "rademacher"),
            ChargeDist::CenteredUniform { half_width } => write!(f, "uniform:{half_width}"),
        }
    }
}

fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln(sinh(x)/x)`, continuous at 0.
fn log_sinhc(x: f64) -> f64 {
    let a = x.abs();
    if a < 1e-3 {
        let a2 = a * a;
        a2 / 6.0 - a2 * a2 / 180.0
    } else if a < 20.0 {
        (a.sinh() / a).ln()
    } else {
        a + (-(-2.0 * a).exp()).ln_1p() - std::f64::consts::LN_2 - a.ln()
    }
}

/// Inverse temperature `β ≥ 0` and pinning bias `h` (any real).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub h: f64,
}

impl ModelParams {
    pub fn new(beta: f64, h: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(PinError::InvalidParameter(format!("beta must be a finite non-negative number, got {beta}")));
        }
        if !h.is_finite() {
            return Err(PinError::InvalidParameter(format!("h must be finite, got {h}")));
        }
        Ok(Self { beta, h })
    }

    /// Site weight `βω - h` in log form.
    #[inline]
    pub fn log_weight(&self, charge: f64) -> f64 {
        self.beta * charge - self.h
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    dist: ChargeDist,
    seed: u64,
    charges: Vec<f64>,
}

/// Header fields of an environment, for provenance records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentRecord {
    #[serde(flatten)]
    pub dist: ChargeDist,
    pub seed: u64,
    pub length: usize,
    pub checksum: String,
}

impl Environment {
    pub fn generate(dist: ChargeDist, seed: u64, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(PinError::InvalidParameter("environment length must be positive".into()));
        }
        if let ChargeDist::CenteredUniform { half_width } = dist {
            if !(half_width > 0.0 && half_width.is_finite()) {
                return Err(PinError::InvalidParameter(format!("uniform half width must be positive, got {half_width}")));
            }
        }
        let mut rng = PinRng::new(seed);
        let mut charges = Vec::with_capacity(length);
        match dist {
            ChargeDist::StandardGaussian => {
                while charges.len() < length {
                    let (a, b) = rng.normal_pair();
                    charges.push(a);
                    if charges.len() < length {
                        charges.push(b);
                    }
                }
            }
            ChargeDist::Rademacher => charges.extend((0..length).map(|_| rng.sign())),
            ChargeDist::CenteredUniform { half_width } => {
                charges.extend((0..length).map(|_| half_width * (2.0 * rng.uniform() - 1.0)))
            }
        }
        Ok(Self { dist, seed, charges })
    }

    pub fn dist(&self) -> ChargeDist {
        self.dist
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    pub fn charges(&self) -> &[f64] {
        &self.charges
    }

    /// The environment seen from site `offset`: `ω'_k = ω_{offset+k}`.
    pub fn shifted(&self, offset: usize) -> Result<Self> {
        if offset >= self.charges.len() {
            return Err(PinError::OutOfRange {
                index: offset,
                min: 0,
                max: self.charges.len() - 1,
            });
        }
        Ok(Self {
            dist: self.dist,
            seed: self.seed,
            charges: self.charges[offset..].to_vec(),
        })
    }

    /// `ln e^{βω_k - h}` for `k < horizon`.
    pub fn log_weights(&self, params: &ModelParams, horizon: usize) -> Vec<f64> {
        self.charges[..horizon].iter().map(|&w| params.log_weight(w)).collect()
    }

    pub fn checksum(&self) -> u64 {
        let mut h = fnv::FnvHasher::default();
        for c in &self.charges {
            h.write(&c.to_le_bytes());
        }
        h.finish()
    }

    pub fn record(&self) -> EnvironmentRecord {
        EnvironmentRecord {
            dist: self.dist,
            seed: self.seed,
            length: self.len(),
            checksum: format!("{:016x}", self.checksum()),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(40 + 8 * self.charges.len());
        out.extend_from_slice(MAGIC_PREFIX);
        out.push(FORMAT_VERSION);
        out.push(self.dist.tag());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&(self.charges.len() as u64).to_le_bytes());
        if let ChargeDist::CenteredUniform { half_width } = self.dist {
            out.extend_from_slice(&half_width.to_le_bytes());
        }
        for c in &self.charges {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out.extend_from_slice(&self.checksum().to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        let magic = cur.take(7)?;
        if &magic[..6] != MAGIC_PREFIX {
            return Err(PinError::BadMagic);
        }
        if magic[6] != FORMAT_VERSION {
            return Err(PinError::VersionMismatch(magic[6]));
        }
        let tag = cur.take(1)?[0];
        let seed = cur.u64()?;
        let length = cur.u64()? as usize;
        let dist = match tag {
            0 => ChargeDist::StandardGaussian,
            1 => ChargeDist::Rademacher,
            2 => ChargeDist::CenteredUniform { half_width: f64::from_bits(cur.u64()?) },
            other => return Err(PinError::InvalidParameter(format!("unknown distribution tag {other}"))),
        };
        let expected = cur.pos + 8 * length + 8;
        if bytes.len() < expected {
            return Err(PinError::TruncatedFile { expected, found: bytes.len() });
        }
        let payload = cur.take(8 * length)?;
        let stored = cur.u64()?;
        let mut h = fnv::FnvHasher::default();
        h.write(payload);
        let computed = h.finish();
        if stored != computed {
            return Err(PinError::ChecksumMismatch { stored, computed });
        }
        let charges = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Self { dist, seed, charges })
    }

    pub fn persist(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        f.sync_all()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(PinError::TruncatedFile { expected: end, found: self.bytes.len() });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}
