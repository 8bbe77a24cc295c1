//! Runs a verification suite from code instead of the command line and
//! prints its JSONL report.

use pinlab::experiments::{exit_code, run, VerificationConfig};
use pinlab::LawFamily;

fn main() -> pinlab::Result<()> {
    let config = VerificationConfig {
        law: LawFamily::SimpleRandomWalkReturn,
        beta: 0.5,
        h: 0.5,
        seeds: vec![1, 2, 3],
        horizon: 4096,
        ..VerificationConfig::default()
    };
    let outcome = run("verify-thm1", &config);
    if let Ok(report) = &outcome {
        print!("{}", report.to_jsonl()?);
    }
    println!("exit code {}", exit_code(&outcome));
    outcome.map(|_| ())
}
