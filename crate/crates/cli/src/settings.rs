//! Run settings: command-line flags layered over an optional JSON config file.

use std::fmt;
use std::path::{Path, PathBuf};

use loewner_lab::report::OutputFormat;
use serde::Deserialize;

/// Environment variable consulted when no seed is given.
pub const SEED_ENV: &str = "LOEWNER_LAB_SEED";

/// A bad or missing parameter; exits with status 2.
#[derive(Debug)]
pub struct ParamError {
    pub field: String,
    pub reason: String,
}

impl ParamError {
    pub fn new(field: &str, reason: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid parameter `{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for ParamError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

/// Every setting, as read from a config file or collected from flags.
///
/// Field names match the long flag names (with `_` for `-`).
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub kappa: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub steps: Option<usize>,
    pub dt: Option<f64>,
    pub tmax: Option<f64>,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    #[serde(alias = "n-max")]
    pub n_max: Option<u32>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub workers: Option<usize>,

    #[serde(alias = "y-min")]
    pub y_min: Option<f64>,
    pub kappas: Option<Vec<f64>>,
    pub points: Option<usize>,
    pub histogram: Option<bool>,
    #[serde(alias = "bin-width")]
    pub bin_width: Option<f64>,
    #[serde(alias = "n-min")]
    pub n_min: Option<u32>,
    pub slit: Option<bool>,
    #[serde(alias = "eps-min")]
    pub eps_min: Option<f64>,
    #[serde(alias = "eps-max")]
    pub eps_max: Option<f64>,
    #[serde(alias = "eps-count")]
    pub eps_count: Option<usize>,
    #[serde(alias = "circle-samples")]
    pub circle_samples: Option<usize>,
    pub u: Option<f64>,
    pub theta0: Option<f64>,
    pub forward: Option<bool>,
    pub r: Option<f64>,
    pub level: Option<Level>,
}

macro_rules! overlay {
    ($top:ident, $base:ident; $($f:ident),* $(,)?) => {
        Settings { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, ParamError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ParamError::new("config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| ParamError::new("config", format!("{}: {e}", path.display())))
    }

    /// `self` wins wherever it is set.
    pub fn over(self, base: Settings) -> Settings {
        let top = self;
        overlay!(top, base;
            kappa, seed, samples, steps, dt, tmax, beta, lambda, alpha, n_max, out, format,
            workers, y_min, kappas, points, histogram, bin_width, n_min, slit, eps_min, eps_max,
            eps_count, circle_samples, u, theta0, forward, r, level)
    }

    /// Seed from flags or config, then [`SEED_ENV`], then 0.
    pub fn resolve_seed(&mut self) -> Result<(), ParamError> {
        if self.seed.is_none() {
            if let Ok(v) = std::env::var(SEED_ENV) {
                let seed = v
                    .trim()
                    .parse()
                    .map_err(|_| ParamError::new("seed", format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
                self.seed = Some(seed);
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or_default()
    }

    pub fn kappa(&self) -> Result<f64, ParamError> {
        let k = self.kappa.ok_or_else(|| ParamError::new("kappa", "required"))?;
        positive("kappa", k)
    }

    pub fn samples_or(&self, default: usize) -> Result<usize, ParamError> {
        at_least("samples", self.samples.unwrap_or(default), 1)
    }

    pub fn steps_or(&self, default: usize) -> Result<usize, ParamError> {
        at_least("steps", self.steps.unwrap_or(default), 1)
    }

    /// Step length and step count from `steps`, `dt` and `tmax`.
    ///
    /// Without `dt` the chain covers `[0, tmax]` (default 1). Giving all three
    /// requires `steps·dt = tmax`.
    pub fn time_grid(&self, default_steps: usize) -> Result<(usize, f64), ParamError> {
        let steps = self.steps_or(default_steps)?;
        let dt = match (self.dt, self.tmax) {
            (Some(dt), Some(t)) => {
                positive("dt", dt)?;
                if (dt * steps as f64 - t).abs() > 1e-9 * t {
                    return Err(ParamError::new("tmax", format!("conflicts with steps·dt = {}", dt * steps as f64)));
                }
                dt
            }
            (Some(dt), None) => positive("dt", dt)?,
            (None, t) => positive("tmax", t.unwrap_or(1.0))? / steps as f64,
        };
        Ok((steps, dt))
    }
}

pub fn positive(field: &str, x: f64) -> Result<f64, ParamError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(ParamError::new(field, format!("must be positive and finite, got {x}")))
    }
}

pub fn at_least(field: &str, n: usize, min: usize) -> Result<usize, ParamError> {
    if n >= min {
        Ok(n)
    } else {
        Err(ParamError::new(field, format!("must be at least {min}, got {n}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: Settings = serde_json::from_str(r#"{"kappa": 2.0, "samples": 10, "n-max": 5}"#).unwrap();
        let flags = Settings {
            kappa: Some(6.0),
            ..Default::default()
        };
        let s = flags.over(file);
        assert_eq!(s.kappa, Some(6.0));
        assert_eq!(s.samples, Some(10));
        assert_eq!(s.n_max, Some(5));
    }

    #[test]
    fn unknown_config_field_is_rejected() {
        assert!(serde_json::from_str::<Settings>(r#"{"kapa": 2.0}"#).is_err());
    }

    #[test]
    fn time_grid_rules() {
        let s = Settings {
            steps: Some(100),
            ..Default::default()
        };
        assert_eq!(s.time_grid(10).unwrap(), (100, 0.01));
        let s = Settings {
            steps: Some(100),
            dt: Some(0.5),
            tmax: Some(1.0),
            ..Default::default()
        };
        assert_eq!(s.time_grid(10).unwrap_err().field, "tmax");
        assert_eq!(Settings::default().kappa().unwrap_err().field, "kappa");
    }
}
