//! Run configuration: flag parsing, config-file merging, validation.
//!
//! Precedence is flag > config file > built-in default.  The config file is
//! JSON with a mandatory `schema` tag so stale configs fail loudly instead
//! of being reinterpreted.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use motion_spherical::reps::{build_so3_rep, build_so4_rep, GeneratorImages, TauLabel};
use serde::{Deserialize, Serialize};

use crate::table::SCHEMA;

/// Flags shared by every verb.  All optional here; each verb states which
/// ones it actually requires.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Motion group dimension (3 or 4)
    #[arg(long, global = true)]
    pub n: Option<usize>,

    /// Highest weight mu (integer for n=3, half-integer for n=4)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu: Option<f64>,

    /// Second spin nu for n=4 (half-integer, nu + mu must be an integer)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub nu: Option<f64>,

    /// Branch index s (0..=a_tau)
    #[arg(long, global = true)]
    pub s: Option<usize>,

    /// Single radius rho; overrides the --rho-max/--rho-steps grid
    #[arg(long, global = true)]
    pub rho: Option<f64>,

    /// Largest radius of the rho grid
    #[arg(long, global = true)]
    pub rho_max: Option<f64>,

    /// Number of rho grid points (the grid is k * rho-max / steps, k = 1..=steps)
    #[arg(long, global = true)]
    pub rho_steps: Option<usize>,

    /// Series degree of the spherical-function kernel
    #[arg(long, global = true)]
    pub quad_degree: Option<usize>,

    /// Radial truncation R of spatial quadrature
    #[arg(long = "radial-R", global = true)]
    pub radial_r: Option<f64>,

    /// Residual tolerance for verbs that check their output (decompose, jet)
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Output path; stdout when omitted
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// RNG seed for the synthetic modes
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Artifact format
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    pub format: Option<String>,

    /// JSON config file; explicit flags override its fields
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// On-disk config shape.  Field names match the long flags.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub rho_max: Option<f64>,
    #[serde(default)]
    pub rho_steps: Option<usize>,
    #[serde(default)]
    pub quad_degree: Option<usize>,
    #[serde(default)]
    pub radial_r: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub format: Option<String>,
}

/// Fully resolved settings with defaults applied.
#[derive(Debug, Clone)]
pub struct Settings {
    pub n: Option<usize>,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub s: usize,
    pub rho: Option<f64>,
    pub rho_max: f64,
    pub rho_steps: usize,
    pub quad_degree: usize,
    pub radial_r: f64,
    pub tol: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub json: bool,
}

impl Settings {
    pub fn resolve(cli: &Common) -> Result<Settings> {
        let file = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                let cfg: RunConfig = serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))?;
                if cfg.schema != SCHEMA {
                    bail!(
                        "config schema mismatch: found {:?}, this build expects {:?}",
                        cfg.schema,
                        SCHEMA
                    );
                }
                cfg
            }
            None => RunConfig::default(),
        };
        let format = cli.format.clone().or(file.format);
        let json = match format.as_deref() {
            None | Some("csv") => false,
            Some("json") => true,
            Some(other) => bail!("unknown format {other:?}: expected csv or json"),
        };
        let s = Settings {
            n: cli.n.or(file.n),
            mu: cli.mu.or(file.mu),
            nu: cli.nu.or(file.nu),
            s: cli.s.or(file.s).unwrap_or(0),
            rho: cli.rho.or(file.rho),
            rho_max: cli.rho_max.or(file.rho_max).unwrap_or(3.0),
            rho_steps: cli.rho_steps.or(file.rho_steps).unwrap_or(60),
            quad_degree: cli.quad_degree.or(file.quad_degree).unwrap_or(64),
            radial_r: cli.radial_r.or(file.radial_r).unwrap_or(6.0),
            tol: cli.tol.or(file.tol).unwrap_or(1e-8),
            seed: cli.seed.or(file.seed).unwrap_or(0),
            out: cli.out.clone().or(file.out),
            json,
        };
        if s.rho_steps == 0 {
            bail!("--rho-steps must be positive");
        }
        if !(s.rho_max > 0.0) {
            bail!("--rho-max must be positive");
        }
        if !(s.radial_r > 0.0) {
            bail!("--radial-R must be positive");
        }
        Ok(s)
    }

    /// The K-type named by --n/--mu/--nu, validated by the library.
    pub fn tau(&self) -> Result<TauLabel> {
        let n = match self.n {
            Some(n) => n,
            None => bail!("this verb needs a K-type: pass --n together with --mu (and --nu for n=4)"),
        };
        let two = |name: &str, v: f64| -> Result<u32> {
            let doubled = 2.0 * v;
            let k = doubled.round();
            if (doubled - k).abs() > 1e-9 || k < 0.0 {
                bail!("--{name} must be a nonnegative half-integer, got {v}");
            }
            Ok(k as u32)
        };
        let label = match n {
            3 => {
                let Some(mu) = self.mu else {
                    bail!("--mu is required for n=3");
                };
                if self.nu.is_some() {
                    bail!("--nu does not apply to n=3 (single-spin types)");
                }
                TauLabel::new(3, 0, two("mu", mu)?)?
            }
            4 => {
                let (Some(mu), Some(nu)) = (self.mu, self.nu) else {
                    bail!("--mu and --nu are both required for n=4");
                };
                TauLabel::new(4, two("nu", nu)?, two("mu", mu)?)?
            }
            other => bail!("--n must be 3 or 4, got {other}"),
        };
        Ok(label)
    }

    /// The generator images of the resolved K-type.
    pub fn rep(&self) -> Result<(TauLabel, GeneratorImages)> {
        let label = self.tau()?;
        let pair = match label.n {
            3 => build_so3_rep(label.two_mu / 2)?,
            _ => build_so4_rep(label.two_nu, label.two_mu)?,
        };
        Ok(pair)
    }

    /// rho evaluation grid: either the single --rho or the uniform grid.
    pub fn rho_grid(&self) -> Vec<f64> {
        match self.rho {
            Some(r) => vec![r],
            None => {
                let h = self.rho_max / self.rho_steps as f64;
                (1..=self.rho_steps).map(|k| k as f64 * h).collect()
            }
        }
    }

    /// Branch index validated against the resolved type.
    pub fn branch(&self, label: &TauLabel) -> Result<usize> {
        if self.s > label.a_tau() {
            bail!("--s {} is outside 0..={} for {}", self.s, label.a_tau(), label.describe());
        }
        Ok(self.s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_overrides_config_file() {
        let dir = std::env::temp_dir();
        let path = dir.join("motion_cli_cfg_test.json");
        let cfg = RunConfig {
            schema: SCHEMA.to_string(),
            n: Some(3),
            mu: Some(2.0),
            rho_max: Some(5.0),
            ..Default::default()
        };
        std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
        let cli = Common {
            mu: Some(1.0),
            config: Some(path.clone()),
            ..Default::default()
        };
        let s = Settings::resolve(&cli).unwrap();
        assert_eq!(s.n, Some(3));
        assert_eq!(s.mu, Some(1.0)); // flag wins
        assert_eq!(s.rho_max, 5.0); // file fills the gap
        let label = s.tau().unwrap();
        assert_eq!(label.two_mu, 2);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let dir = std::env::temp_dir();
        let path = dir.join("motion_cli_cfg_stale.json");
        std::fs::write(&path, r#"{"schema":"motion-spherical-cli/0"}"#).unwrap();
        let cli = Common { config: Some(path.clone()), ..Default::default() };
        let err = Settings::resolve(&cli).unwrap_err().to_string();
        assert!(err.contains("schema mismatch"), "{err}");
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn tau_validation_reports_bad_spins() {
        let mut cli = Common { n: Some(3), mu: Some(0.5), ..Default::default() };
        let s = Settings::resolve(&cli).unwrap();
        assert!(s.tau().is_err()); // half-integer mu is not an SO(3) type
        cli.mu = Some(1.0);
        cli.nu = Some(0.5);
        let s = Settings::resolve(&cli).unwrap();
        assert!(s.tau().is_err()); // nu rejected for n=3
    }
}
