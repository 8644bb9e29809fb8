//! Run configuration: defaults, config-file parsing, and CLI overrides.
//!
//! Precedence (lowest to highest): built-in defaults, `--config FILE`
//! key/value pairs, explicit command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

/// Shared knobs for every experiment.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Scaling exponent of the cascade, in (0, 1).
    pub alpha: f64,
    /// Grid exponent `q`; the solver grid is `2^q x 2^q` cells.
    pub grid_exp: u32,
    /// Baseline number of shear stages per mixing window.
    pub depth: u32,
    /// Deepest window index retained in the schedule truncation.
    pub jmax: u32,
    /// Diffusivities to sweep, largest first.
    pub kappa_ladder: Vec<f64>,
    /// Seed for all pseudo-random draws.
    pub seed: u64,
    /// Output directory root.
    pub out: PathBuf,
    /// Whether to dump PGM frames of the evolving field.
    pub snapshots: bool,
    /// Free-form extra settings from the config file (`key = value`).
    pub extra: BTreeMap<String, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 0.5,
            grid_exp: 10,
            depth: 6,
            jmax: 16,
            kappa_ladder: parse_ladder("-10:-18:-1").expect("default ladder"),
            seed: 1,
            out: PathBuf::from("runs"),
            snapshots: false,
            extra: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    /// Applies `key = value` lines from a config file. Unknown keys are
    /// collected in `extra` so individual experiments can consume them.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{}:{}: expected `key = value`", path.display(), lineno + 1);
            };
            let (key, value) = (key.trim(), value.trim());
            let ctx = || format!("{}:{}: bad value for {key}", path.display(), lineno + 1);
            match key {
                "alpha" => self.alpha = value.parse().with_context(ctx)?,
                "grid_exp" => self.grid_exp = value.parse().with_context(ctx)?,
                "depth" => self.depth = value.parse().with_context(ctx)?,
                "jmax" => self.jmax = value.parse().with_context(ctx)?,
                "kappa_ladder" => self.kappa_ladder = parse_ladder(value).with_context(ctx)?,
                "seed" => self.seed = value.parse().with_context(ctx)?,
                "out" => self.out = PathBuf::from(value),
                "snapshots" => self.snapshots = value.parse().with_context(ctx)?,
                _ => {
                    self.extra.insert(key.to_string(), value.to_string());
                }
            }
        }
        Ok(())
    }

    /// Validates ranges that every experiment relies on.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("alpha must lie in (0, 1); got {}", self.alpha);
        }
        if self.grid_exp == 0 || self.grid_exp > 13 {
            bail!("grid_exp must lie in 1..=13; got {}", self.grid_exp);
        }
        if self.depth == 0 || self.depth > 24 {
            bail!("depth must lie in 1..=24; got {}", self.depth);
        }
        if self.kappa_ladder.is_empty() {
            bail!("kappa ladder is empty");
        }
        if self.kappa_ladder.iter().any(|&k| !(k > 0.0) || k >= 1.0) {
            bail!("kappa values must lie in (0, 1)");
        }
        Ok(())
    }

    /// Looks up an `extra` entry as a float.
    pub fn extra_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.extra.get(key) {
            None => Ok(None),
            Some(v) => Ok(Some(
                v.parse::<f64>()
                    .with_context(|| format!("config key {key} = {v:?} is not a number"))?,
            )),
        }
    }

    /// Looks up an `extra` entry as a comma-separated float list.
    pub fn extra_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.extra.get(key) {
            None => Ok(None),
            Some(v) => {
                let parsed: std::result::Result<Vec<f64>, _> =
                    v.split(',').map(|s| s.trim().parse::<f64>()).collect();
                Ok(Some(parsed.with_context(|| {
                    format!("config key {key} = {v:?} is not a float list")
                })?))
            }
        }
    }

    /// JSON echo of the configuration, embedded in every report.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "alpha": self.alpha,
            "grid_exp": self.grid_exp,
            "depth": self.depth,
            "jmax": self.jmax,
            "kappa_ladder": self.kappa_ladder,
            "seed": self.seed,
            "out": self.out.display().to_string(),
            "snapshots": self.snapshots,
            "extra": self.extra,
        })
    }
}

/// Parses a diffusivity ladder given as `lo:hi:step` in log2 units,
/// e.g. `-10:-18:-1` for `2^-10, 2^-11, ..., 2^-18` (inclusive ends).
pub fn parse_ladder(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        bail!("kappa ladder must be lo:hi:step in log2 units, e.g. -10:-18:-1");
    }
    let lo: f64 = parts[0].trim().parse().context("ladder lo")?;
    let hi: f64 = parts[1].trim().parse().context("ladder hi")?;
    let step: f64 = parts[2].trim().parse().context("ladder step")?;
    if step == 0.0 {
        bail!("ladder step must be nonzero");
    }
    if (hi - lo) * step < 0.0 {
        bail!("ladder step {step} does not move from {lo} toward {hi}");
    }
    let n = ((hi - lo) / step).round() as i64;
    if ((lo + n as f64 * step) - hi).abs() > 1e-9 {
        bail!("ladder step {step} does not divide the range {lo}..{hi}");
    }
    Ok((0..=n).map(|k| 2f64.powf(lo + k as f64 * step)).collect())
}
