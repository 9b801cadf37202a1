//! Command-line front end for `kepler-qbh`.

pub mod config;
pub mod error;
pub mod orbit;
pub mod output;
pub mod reduce;
pub mod report;
pub mod spectrum;
pub mod suites;
pub mod verify;

use std::io::Write;
use std::path::Path;

pub use config::{Cli, Command, RunConfig};
pub use error::{CliError, Result};

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => output::write_atomic(path, text.as_bytes()),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn json<T: serde::Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Runs one command and returns whether every asserted check passed.
pub fn run(cli: &Cli) -> Result<bool> {
    let config = RunConfig::resolve(&cli.flags)?;
    let out = config.out.as_deref();
    match &cli.command {
        Command::Verify => {
            let report = verify::cmd_verify(&config)?;
            for s in &report.suites {
                eprintln!("{}", s.status_line());
            }
            let flagged = report.mismatches.iter().filter(|m| m.flagged).count();
            eprintln!("printed-formula mismatches flagged: {flagged} of {}", report.mismatches.len());
            emit(out, &report.to_json()?)?;
            Ok(report.pass())
        }
        Command::Orbit => {
            let o = orbit::cmd_orbit(&config)?;
            let summary = json(&o.report)?;
            match out {
                Some(path) => {
                    output::write_atomic(path, o.csv.as_bytes())?;
                    output::write_atomic(&path.with_extension("drift.json"), summary.as_bytes())?;
                    std::io::stdout().write_all(summary.as_bytes()).map_err(|e| CliError::io("<stdout>", e))?;
                }
                None => {
                    emit(None, &o.csv)?;
                    eprint!("{summary}");
                }
            }
            Ok(true)
        }
        Command::Spectrum => {
            let report = spectrum::cmd_spectrum(&config)?;
            emit(out, &json(&report)?)?;
            Ok(true)
        }
        Command::ReduceKepler { golden } => {
            let report = reduce::cmd_reduce_kepler(&config)?;
            for s in &report.suites {
                eprintln!("{}", s.status_line());
            }
            let text = report.to_json()?;
            emit(out, &text)?;
            let mut pass = report.pass();
            if let Some(g) = golden {
                if let Some(diff) = reduce::compare_golden(&text, g)? {
                    eprintln!("golden mismatch:\n{diff}");
                    pass = false;
                }
            }
            Ok(pass)
        }
    }
}
