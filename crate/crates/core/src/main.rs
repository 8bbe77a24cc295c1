use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use pinlab::experiments::{self, parse_seeds, Overrides, VerificationConfig};
use pinlab::partition::Engine;
use pinlab::{ChargeDist, LawFamily, PinError};

/// Disordered pinning model laboratory.
#[derive(Parser)]
#[command(name = "pinlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and save seeded environments
    GenEnv(Common),
    /// Tabulate a renewal law
    BuildLaw(Common),
    /// Build constrained, free and ladder tables
    Compute(Common),
    /// Draw exact samples of contact sets
    Sample(Common),
    /// Finite-size free energies
    FreeEnergy(Common),
    /// Estimate the critical bias
    Hc(Common),
    /// Summability of the partition function
    VerifyThm1(Common),
    /// Exponential decay of the restricted sums
    VerifyProp(Common),
    /// Bound on the number of contacts
    VerifyThm2(Common),
    /// Reference against fast engine
    Bench(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// powerlaw:<alpha> | srw | geometric:<p>
    #[arg(long)]
    law: Option<String>,
    /// gaussian | rademacher | uniform[:<half_width>]
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    /// e.g. 1,2,10..15
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long = "L")]
    horizon: Option<usize>,
    #[arg(long = "Nmax")]
    max_jumps: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Report base path; writes <out>.jsonl, <out>.csv and attachments
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    hc_reference: Option<f64>,
    /// reference | fast
    #[arg(long)]
    engine: Option<String>,
    #[arg(long = "fast-L")]
    fast_horizon: Option<usize>,
    /// Sampler endpoint
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

impl Common {
    fn resolve(self) -> pinlab::Result<VerificationConfig> {
        let base = match &self.config {
            Some(path) => VerificationConfig::load(path)?,
            None => VerificationConfig::default(),
        };
        let engine = match self.engine.as_deref() {
            None => None,
            Some("reference") => Some(Engine::Reference),
            Some("fast") => Some(Engine::Fast),
            Some(other) => return Err(PinError::Config(format!("unknown engine `{other}`"))),
        };
        let config = base.apply(Overrides {
            law: self.law.map(|s| s.parse::<LawFamily>()).transpose()?,
            dist: self.dist.map(|s| s.parse::<ChargeDist>()).transpose()?,
            beta: self.beta,
            h: self.h,
            seeds: self.seeds.as_deref().map(parse_seeds).transpose()?,
            horizon: self.horizon,
            max_jumps: self.max_jumps,
            epsilon: self.epsilon,
            c: self.c,
            out: self.out,
            hc_reference: self.hc_reference,
            engine,
            fast_horizon: self.fast_horizon,
            site: self.n,
            samples: self.samples,
        });
        config.validate()?;
        Ok(config)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match cli.command {
        Command::GenEnv(c) => ("gen-env", c),
        Command::BuildLaw(c) => ("build-law", c),
        Command::Compute(c) => ("compute", c),
        Command::Sample(c) => ("sample", c),
        Command::FreeEnergy(c) => ("free-energy", c),
        Command::Hc(c) => ("hc", c),
        Command::VerifyThm1(c) => ("verify-thm1", c),
        Command::VerifyProp(c) => ("verify-prop", c),
        Command::VerifyThm2(c) => ("verify-thm2", c),
        Command::Bench(c) => ("bench", c),
    };
    let outcome = common.resolve().and_then(|config| {
        let report = experiments::run(name, &config)?;
        match &config.out {
            Some(base) => {
                for path in report.write(base)? {
                    eprintln!("wrote {}", path.display());
                }
            }
            None => print!("{}", report.to_jsonl()?),
        }
        Ok(report)
    });
    match &outcome {
        Ok(report) => {
            for c in &report.checks {
                eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(experiments::exit_code(&outcome) as u8)
}
