//! Numerical laboratory for the quenched disordered pinning model.

pub mod environment;
pub mod error;
pub mod experiments;
pub mod logspace;
pub mod partition;
pub mod phase;
pub mod renewal;
pub mod rng;
pub mod sampler;

pub use environment::{ChargeDist, Environment, ModelParams};
pub use error::{PinError, Result};
pub use renewal::{LawFamily, LawSpec, RenewalLaw};
