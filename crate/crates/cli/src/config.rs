//! Run configuration: command-line flags over a flat `key = value` file over defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kepler_qbh::dynamics::Integrator;
use kepler_qbh::{ModelParams64, PhasePoint64};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "kepler-qbh", version, about = "Identity verification, orbits and recursion spectra for the (k1,k2,k3) Kepler-related system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run every identity suite at seeded random points and report residuals.
    Verify,
    /// Propagate one orbit; write the trajectory CSV and a drift summary.
    Orbit,
    /// Eigenvalues, determinants and ranks of the four recursion operators.
    Spectrum,
    /// Check the k2 = k3 = 0 reduction and optionally compare with a golden report.
    ReduceKepler {
        /// Golden report to compare with byte for byte.
        #[arg(long)]
        golden: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub k1: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub k2: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub k3: Option<f64>,
    /// Number of random phase points.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override of every identity tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "t-max", global = true)]
    pub t_max: Option<f64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// midpoint | rk4
    #[arg(long, global = true)]
    pub integrator: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub b0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub pa0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub pb0: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub points: usize,
    pub seed: u64,
    pub tol: Option<f64>,
    pub t_max: f64,
    pub dt: f64,
    pub integrator: Integrator,
    pub a0: f64,
    pub b0: f64,
    pub pa0: f64,
    pub pb0: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            k1: 1.0,
            k2: 0.3,
            k3: -0.2,
            points: 1000,
            seed: 1,
            tol: None,
            t_max: 50.0,
            dt: 1e-3,
            integrator: Integrator::Midpoint,
            a0: 1.0,
            b0: 0.0,
            pa0: 0.0,
            pb0: 1.0,
            out: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| CliError::Usage(format!("invalid value '{value}' for '{key}'")))
}

impl RunConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "k1" => self.k1 = parse(key, value)?,
            "k2" => self.k2 = parse(key, value)?,
            "k3" => self.k3 = parse(key, value)?,
            "points" => self.points = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "tol" => self.tol = Some(parse(key, value)?),
            "t_max" | "t-max" => self.t_max = parse(key, value)?,
            "dt" => self.dt = parse(key, value)?,
            "integrator" => self.integrator = value.parse().map_err(|e: kepler_qbh::Error| CliError::Usage(e.to_string()))?,
            "a0" => self.a0 = parse(key, value)?,
            "b0" => self.b0 = parse(key, value)?,
            "pa0" => self.pa0 = parse(key, value)?,
            "pb0" => self.pb0 = parse(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(CliError::Usage(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` text; `#` starts a comment.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {}: expected key = value, got '{raw}'", n + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.apply_file_text(&text)
    }

    pub fn apply_flags(&mut self, f: &Flags) -> Result<()> {
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = f.$field { self.$field = v; } )* };
        }
        take!(k1, k2, k3, points, seed, t_max, dt, a0, b0, pa0, pb0);
        if let Some(t) = f.tol {
            self.tol = Some(t);
        }
        if let Some(i) = &f.integrator {
            self.set("integrator", i)?;
        }
        if let Some(o) = &f.out {
            self.out = Some(o.clone());
        }
        Ok(())
    }

    /// Defaults, then the file named by `--config`, then the remaining flags.
    pub fn resolve(flags: &Flags) -> Result<Self> {
        let mut c = Self::default();
        if let Some(path) = &flags.config {
            c.apply_file(path)?;
        }
        c.apply_flags(flags)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Usage(m));
        for (name, v) in [("k1", self.k1), ("k2", self.k2), ("k3", self.k3), ("a0", self.a0), ("b0", self.b0), ("pa0", self.pa0), ("pb0", self.pb0)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if self.points < 1 {
            return bad("points must be >= 1".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max must be >= 0, got {}", self.t_max));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return bad(format!("tol must be > 0, got {t}"));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> ModelParams64 {
        ModelParams64::new(self.k1, self.k2, self.k3)
    }

    pub fn initial_point(&self) -> Result<PhasePoint64> {
        PhasePoint64::new(self.a0, self.b0, self.pa0, self.pb0).map_err(|e| CliError::Usage(format!("initial point: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flags_over_file_over_defaults() {
        let mut c = RunConfig::default();
        c.apply_file_text("# comment\nk1 = 2.5\npoints=10\n\nintegrator = rk4 # trailing\n").unwrap();
        let flags = Flags { points: Some(7), ..Default::default() };
        c.apply_flags(&flags).unwrap();
        assert_eq!(c.k1, 2.5);
        assert_eq!(c.points, 7);
        assert_eq!(c.integrator, Integrator::Rk4);
        assert_eq!(c.k2, RunConfig::default().k2);
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = RunConfig::default();
        assert!(matches!(c.apply_file_text("nonsense"), Err(CliError::Usage(_))));
        assert!(matches!(c.apply_file_text("colour = red"), Err(CliError::Usage(_))));
        assert!(matches!(c.apply_file_text("dt = fast"), Err(CliError::Usage(_))));
        c.dt = 0.0;
        assert!(c.validate().is_err());
        let c = RunConfig { points: 0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = RunConfig { t_max: -1.0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
