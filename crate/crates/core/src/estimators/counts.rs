//! Dyadic counts `N_{n,β} = #{j : s·4^n ≤ j ≤ 2·4^n, |f̂'_{(j-1)4^{-n}}(i2^{-n})| ≥ 2^{nβ}}`.
//!
//! One Brownian path on `[0, 2]` is sampled per path index at resolution
//! `4^{-n_max}/FINE_PER_CELL`; each `f̂_T'` is obtained from the reverse flow
//! driven by `V_{T-s} - V_T` with blocks of fine steps merged while
//! `block·dt ≤ rel·|Z|²`.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{fit_log_mean_slope, mean_stderr};
use super::{check_kappa, check_samples, sample_stream};
use crate::error::{LabError, Result};
use crate::loewner::reverse_kernel;
use crate::spectra::{rho_of_beta, SpectrumParams};

/// Fine steps per dyadic cell `4^{-n_max}`.
pub const FINE_PER_CELL: usize = 128;
pub const DEFAULT_MAX_N: u32 = 7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountDirection {
    /// `≥` for `β ≥ β_#`, `≤` below.
    #[default]
    Auto,
    AtLeast,
    AtMost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountConfig {
    pub kappa: f64,
    pub n_grid: Vec<u32>,
    pub n_paths: usize,
    pub seed: u64,
    /// Lower end `s` of the index window `[s·4^n, 2·4^n]`.
    pub s_lower: f64,
    pub max_n: u32,
    pub rel: f64,
}

impl CountConfig {
    pub fn new(kappa: f64, n_grid: Vec<u32>, n_paths: usize, seed: u64) -> Self {
        Self {
            kappa,
            n_grid,
            n_paths,
            seed,
            s_lower: 1.0,
            max_n: DEFAULT_MAX_N,
            rel: 0.01,
        }
    }

    fn validate(&self) -> Result<()> {
        check_kappa(self.kappa)?;
        check_samples(self.n_paths, 2)?;
        if self.n_grid.len() < 2 || self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::param("n_grid", "need at least two increasing levels"));
        }
        if self.n_grid[0] == 0 {
            return Err(LabError::param("n_grid", "levels start at 1"));
        }
        let top = *self.n_grid.last().expect("nonempty");
        if top > self.max_n {
            return Err(LabError::ResourceGuard(format!(
                "level n = {top} exceeds the cap {} (cost grows like 2^(4n))",
                self.max_n
            )));
        }
        if !(self.s_lower > 0.0 && self.s_lower <= 2.0) {
            return Err(LabError::param("s_lower", "must lie in (0, 2]"));
        }
        if !(self.rel > 0.0 && self.rel <= 0.1) {
            return Err(LabError::param("rel", "must lie in (0, 0.1]"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountStatistic {
    pub kappa: f64,
    pub beta: f64,
    pub n: u32,
    pub s_lower: f64,
    /// Total count over all paths.
    pub count: u64,
    /// Indices scanned over all paths.
    pub scanned: u64,
    pub per_path: Vec<u64>,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountScaling {
    pub kappa: f64,
    pub beta: f64,
    pub direction: CountDirection,
    pub stats: Vec<CountStatistic>,
    /// Slope of `log₂ E[N_{n,β}]` against `n`.
    pub slope: f64,
    pub slope_stderr: f64,
    /// `2 - ρ(β)`.
    pub expected_slope: f64,
    pub n_paths: usize,
    pub seed: u64,
}

/// `log|f̂'_{(j-1)4^{-n}}(i2^{-n})|` for every level and index, one path.
struct PathDerivatives {
    /// `logs[level][k]` for `j = j_min(level) + k`.
    logs: Vec<Vec<f64>>,
}

fn index_window(n: u32, s_lower: f64) -> (u64, u64) {
    let cells = 1u64 << (2 * n);
    ((s_lower * cells as f64).ceil() as u64, 2 * cells)
}

fn sample_fine_path(cfg: &CountConfig, path: usize, dt: f64, len: usize) -> Vec<f64> {
    let mut rng = sample_stream(cfg.seed, 0, path);
    let sd = dt.sqrt();
    let mut values = Vec::with_capacity(len + 1);
    let mut v = 0.0;
    values.push(v);
    for _ in 0..len {
        let x: f64 = StandardNormal.sample(&mut rng);
        v += sd * x;
        values.push(v);
    }
    values
}

/// `log|f̂_T'(iy)|` from the reverse flow over the fine path with `T = m·dt`.
fn reverse_log_deriv(values: &[f64], m: usize, y: f64, a: f64, dt: f64, rel: f64) -> f64 {
    let vt = values[m];
    let mut h = Complex64::new(0.0, y);
    let mut log_d = 0.0;
    let mut idx = m;
    while idx > 0 {
        let u_now = values[idx] - vt;
        let dz = Complex64::new(h.re - u_now, h.im);
        let block = ((rel * dz.norm_sqr() / dt) as usize).clamp(1, idx);
        let (next, d) = reverse_kernel(h, u_now, (2.0 * a * dt * block as f64).sqrt());
        h = next;
        log_d += d.norm().ln();
        idx -= block;
    }
    log_d
}

fn path_derivatives(cfg: &CountConfig, path: usize) -> PathDerivatives {
    let top = *cfg.n_grid.last().expect("validated");
    let dt = 1.0 / ((1u64 << (2 * top)) as f64 * FINE_PER_CELL as f64);
    let len = 2 * (1usize << (2 * top)) * FINE_PER_CELL;
    let values = sample_fine_path(cfg, path, dt, len);
    let a = 2.0 / cfg.kappa;
    let logs = cfg
        .n_grid
        .iter()
        .map(|&n| {
            let (lo, hi) = index_window(n, cfg.s_lower);
            let stride = FINE_PER_CELL << (2 * (top - n));
            let y = 0.5f64.powi(n as i32);
            (lo..=hi)
                .map(|j| {
                    let m = (j as usize - 1) * stride;
                    reverse_log_deriv(&values, m, y, a, dt, cfg.rel)
                })
                .collect()
        })
        .collect();
    PathDerivatives { logs }
}

fn counts_for(
    cfg: &CountConfig,
    derivs: &[PathDerivatives],
    beta: f64,
    direction: CountDirection,
) -> Result<CountScaling> {
    let p = SpectrumParams::new(cfg.kappa)?;
    let direction = match direction {
        CountDirection::Auto if beta >= p.beta_hash => CountDirection::AtLeast,
        CountDirection::Auto => CountDirection::AtMost,
        d => d,
    };
    let stats: Vec<CountStatistic> = cfg
        .n_grid
        .iter()
        .enumerate()
        .map(|(level, &n)| {
            let threshold = n as f64 * beta * std::f64::consts::LN_2;
            let per_path: Vec<u64> = derivs
                .iter()
                .map(|d| {
                    d.logs[level]
                        .iter()
                        .filter(|&&l| match direction {
                            CountDirection::AtMost => l <= threshold,
                            _ => l >= threshold,
                        })
                        .count() as u64
                })
                .collect();
            let as_f: Vec<f64> = per_path.iter().map(|&c| c as f64).collect();
            let m = mean_stderr(&as_f);
            CountStatistic {
                kappa: cfg.kappa,
                beta,
                n,
                s_lower: cfg.s_lower,
                count: per_path.iter().sum(),
                scanned: (derivs[0].logs[level].len() * derivs.len()) as u64,
                per_path,
                mean: m.mean,
                stderr: m.stderr,
            }
        })
        .collect();
    let x: Vec<f64> = cfg
        .n_grid
        .iter()
        .map(|&n| n as f64 * std::f64::consts::LN_2)
        .collect();
    let samples: Vec<Vec<f64>> = stats
        .iter()
        .map(|s| s.per_path.iter().map(|&c| c as f64).collect())
        .collect();
    let (slope, slope_stderr) = match fit_log_mean_slope(&x, &samples) {
        Ok(fit) => (fit.slope, fit.slope_stderr),
        Err(_) => (f64::NAN, f64::NAN),
    };
    Ok(CountScaling {
        kappa: cfg.kappa,
        beta,
        direction,
        stats,
        slope,
        slope_stderr,
        expected_slope: 2.0 - rho_of_beta(cfg.kappa, beta).unwrap_or(f64::NAN),
        n_paths: cfg.n_paths,
        seed: cfg.seed,
    })
}

/// Count scaling for several β from one set of simulated paths.
pub fn estimate_count_scaling_multi(
    cfg: &CountConfig,
    betas: &[(f64, CountDirection)],
) -> Result<Vec<CountScaling>> {
    cfg.validate()?;
    if betas.is_empty() {
        return Err(LabError::param("beta", "need at least one β"));
    }
    if betas.iter().any(|(b, _)| !b.is_finite()) {
        return Err(LabError::param("beta", "must be finite"));
    }
    let derivs: Vec<PathDerivatives> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| path_derivatives(cfg, p))
        .collect();
    betas
        .iter()
        .map(|&(b, d)| counts_for(cfg, &derivs, b, d))
        .collect()
}

/// Count scaling at one β with the default window `s = 1` and cap `n ≤ 7`.
///
/// The slope is `NaN` when some level has a zero mean count.
pub fn estimate_count_scaling(
    kappa: f64,
    beta: f64,
    n_grid: &[u32],
    n_paths: usize,
    master_seed: u64,
) -> Result<CountScaling> {
    let cfg = CountConfig::new(kappa, n_grid.to_vec(), n_paths, master_seed);
    Ok(estimate_count_scaling_multi(&cfg, &[(beta, CountDirection::Auto)])?.remove(0))
}
