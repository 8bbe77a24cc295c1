use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::environment::ChargeDist;
use crate::error::{PinError, Result};
use crate::partition::Engine;
use crate::renewal::LawFamily;

/// Run configuration shared by every subcommand.
///
/// ```toml
/// law = "srw"            # powerlaw:<alpha> | srw | geometric:<p>
/// dist = "gaussian"      # gaussian | rademacher | uniform[:<half_width>]
/// beta = 0.0
/// h = 0.5
/// seeds = [1, 2, 3]
/// L = 4096
/// Nmax = 128
/// epsilon = 0.1
/// c = 4.0
/// out = "reports/thm2"
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerificationConfig {
    #[serde(with = "as_text")]
    pub law: LawFamily,
    #[serde(with = "as_text")]
    pub dist: ChargeDist,
    pub beta: f64,
    pub h: f64,
    pub seeds: Vec<u64>,
    #[serde(rename = "L")]
    pub horizon: usize,
    #[serde(rename = "Nmax")]
    pub max_jumps: usize,
    pub epsilon: f64,
    /// constant in the contact-count threshold `⌈c ln n⌉`
    pub c: f64,
    pub out: Option<PathBuf>,
    /// `ĥ_c` used inside bounds; when absent it is 0 at `β = 0` and a
    /// bisection estimate otherwise
    pub hc_reference: Option<f64>,
    pub engine: Engine,
    /// largest horizon timed for the fast engine
    #[serde(rename = "fast_L")]
    pub fast_horizon: usize,
    /// bisection tolerance in `h`
    pub tol: f64,
    /// sampler: endpoint and number of paths
    pub site: Option<usize>,
    pub samples: usize,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            law: LawFamily::SimpleRandomWalkReturn,
            dist: ChargeDist::StandardGaussian,
            beta: 0.0,
            h: 0.5,
            seeds: (1..=16).collect(),
            horizon: 4096,
            max_jumps: 128,
            epsilon: 0.1,
            c: 4.0,
            out: None,
            hc_reference: None,
            engine: Engine::Reference,
            fast_horizon: 1 << 17,
            tol: 1e-3,
            site: None,
            samples: 10_000,
        }
    }
}

/// Flag values that replace config-file entries when present.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub law: Option<LawFamily>,
    pub dist: Option<ChargeDist>,
    pub beta: Option<f64>,
    pub h: Option<f64>,
    pub seeds: Option<Vec<u64>>,
    pub horizon: Option<usize>,
    pub max_jumps: Option<usize>,
    pub epsilon: Option<f64>,
    pub c: Option<f64>,
    pub out: Option<PathBuf>,
    pub hc_reference: Option<f64>,
    pub engine: Option<Engine>,
    pub fast_horizon: Option<usize>,
    pub site: Option<usize>,
    pub samples: Option<usize>,
}

impl VerificationConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| PinError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| PinError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| PinError::Config(e.to_string()))
    }

    pub fn apply(mut self, o: Overrides) -> Self {
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = o.$field { self.$field = v; } )* };
        }
        take!(law, dist, beta, h, seeds, horizon, max_jumps, epsilon, c, engine, fast_horizon, samples);
        if o.out.is_some() {
            self.out = o.out;
        }
        if o.hc_reference.is_some() {
            self.hc_reference = o.hc_reference;
        }
        if o.site.is_some() {
            self.site = o.site;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(PinError::Config(msg));
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return fail(format!("beta must be finite and >= 0, got {}", self.beta));
        }
        if !self.h.is_finite() {
            return fail(format!("h must be finite, got {}", self.h));
        }
        if self.seeds.is_empty() {
            return fail("seed list is empty".into());
        }
        if self.horizon < 2 {
            return fail(format!("L must be at least 2, got {}", self.horizon));
        }
        if self.max_jumps == 0 || self.max_jumps > self.horizon {
            return fail(format!("Nmax must lie in 1..={}, got {}", self.horizon, self.max_jumps));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return fail(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return fail(format!("c must be positive, got {}", self.c));
        }
        if !(self.tol > 0.0) {
            return fail(format!("tol must be positive, got {}", self.tol));
        }
        if let Some(hc) = self.hc_reference {
            if !hc.is_finite() {
                return fail(format!("hc_reference must be finite, got {hc}"));
            }
        }
        Ok(())
    }

    /// Law table size: the horizon, or the sampler site if larger.
    pub fn law_table(&self) -> usize {
        self.horizon.max(self.site.unwrap_or(0)).max(2)
    }
}

/// Comma-separated seeds, with `a..b` for inclusive ranges: `1,2,10..15`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || PinError::Config(format!("bad seed list entry `{part}`"));
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            if b < a {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(PinError::Config("seed list is empty".into()));
    }
    Ok(out)
}

mod as_text {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};
    use std::fmt::Display;
    use std::str::FromStr;

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        let text = String::deserialize(d)?;
        text.parse().map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let cfg = VerificationConfig::from_toml(
            "law = \"powerlaw:2\"\nbeta = 0.5\nh = 0.3\nseeds = [4, 5]\nL = 1024\nNmax = 64\n",
        )
        .unwrap();
        assert_eq!(cfg.law, LawFamily::PowerLaw { alpha: 2.0 });
        assert_eq!(cfg.horizon, 1024);
        assert_eq!(cfg.c, 4.0);
        let cfg = cfg.apply(Overrides {
            h: Some(0.7),
            seeds: Some(vec![9]),
            ..Overrides::default()
        });
        assert_eq!(cfg.h, 0.7);
        assert_eq!(cfg.beta, 0.5);
        assert_eq!(cfg.seeds, vec![9]);
        cfg.validate().unwrap();
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = VerificationConfig {
            out: Some("x/y".into()),
            hc_reference: Some(0.1),
            dist: ChargeDist::unit_uniform(),
            ..VerificationConfig::default()
        };
        let text = cfg.to_toml().unwrap();
        assert_eq!(VerificationConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(VerificationConfig::from_toml("lawz = \"srw\"").is_err());
        assert!(VerificationConfig::from_toml("law = \"cauchy\"").is_err());
        let bad = [
            VerificationConfig { max_jumps: 5000, ..Default::default() },
            VerificationConfig { seeds: vec![], ..Default::default() },
            VerificationConfig { epsilon: 0.0, ..Default::default() },
            VerificationConfig { beta: -1.0, ..Default::default() },
            VerificationConfig { horizon: 1, max_jumps: 1, ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(PinError::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1, 2,5..7").unwrap(), vec![1, 2, 5, 6, 7]);
        assert!(parse_seeds("").is_err());
        assert!(parse_seeds("3..1").is_err());
        assert!(parse_seeds("a").is_err());
    }
}
