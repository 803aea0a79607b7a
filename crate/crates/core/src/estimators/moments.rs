//! Moments `E|h'_{t²}(i)|^λ` of the reverse flow and the histogram of the
//! local exponent `log|h'_{t²}(i)| / log t`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{DrivingModel, ReverseWalker, StepPolicy};
use super::stats::{fit_log_mean_slope, mean_stderr};
use super::{check_kappa, check_samples, sample_stream};
use crate::error::{LabError, Result};
use crate::spectra::{rho_of_beta, ExponentPoint, SpectrumParams};

/// Largest step as a fraction of the total time `t²`.
pub const MOMENT_DT_FRACTION: f64 = 1e-3;
pub const MIN_MOMENT_SAMPLES: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub kappa: f64,
    pub lambda: f64,
    pub t_grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
    /// `-ζ(λ)`, the slope predicted by the moment bound.
    pub expected_slope: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub policy: StepPolicy,
}

/// Draws of `log|h'_{t²}(i)|`, `n_samples` per entry of `t_grid`.
///
/// Sample `i` at grid index `j` uses stream `(j << 32) | i`, so the result is a
/// pure function of the arguments whatever the thread count.
fn log_derivative_draws(
    kappa: f64,
    t_grid: &[f64],
    n_samples: usize,
    master_seed: u64,
    rel: f64,
    model: DrivingModel,
) -> Vec<Vec<f64>> {
    let a = 2.0 / kappa;
    t_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let horizon = t * t;
            let policy = StepPolicy::new(rel, MOMENT_DT_FRACTION * horizon);
            (0..n_samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = sample_stream(master_seed, j, i);
                    let mut w = ReverseWalker::new(Complex64::new(0.0, 1.0), a);
                    w.advance_to(horizon, &policy, model, &mut rng);
                    w.log_deriv
                })
                .collect()
        })
        .collect()
}

fn check_t_grid(t_grid: &[f64], lo: f64, hi: f64) -> Result<()> {
    if t_grid.len() < 2 {
        return Err(LabError::param("t_grid", "need at least two times"));
    }
    if t_grid.iter().any(|&t| !(lo..=hi).contains(&t)) {
        return Err(LabError::param("t_grid", format!("times must lie in [{lo}, {hi}]")));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::param("t_grid", "times must be strictly increasing"));
    }
    Ok(())
}

/// Estimates `E|h'_{t²}(i)|^λ` on `t_grid` and fits the log-log slope.
pub fn estimate_moment(
    kappa: f64,
    lambda: f64,
    t_grid: &[f64],
    n_samples: usize,
    master_seed: u64,
) -> Result<MomentEstimate> {
    estimate_moment_with(kappa, lambda, t_grid, n_samples, master_seed, StepPolicy::DEFAULT_REL)
}

/// [`estimate_moment`] with an explicit relative step `rel` (`dt ≤ rel·|Z|²`).
pub fn estimate_moment_with(
    kappa: f64,
    lambda: f64,
    t_grid: &[f64],
    n_samples: usize,
    master_seed: u64,
    rel: f64,
) -> Result<MomentEstimate> {
    check_kappa(kappa)?;
    let p = SpectrumParams::new(kappa)?;
    if !(lambda < p.lambda_c) {
        return Err(LabError::param(
            "lambda",
            format!("must be below λ_c = {} (got {lambda})", p.lambda_c),
        ));
    }
    check_t_grid(t_grid, 2.0, 64.0)?;
    check_samples(n_samples, MIN_MOMENT_SAMPLES)?;
    if !(rel > 0.0 && rel <= 0.1) {
        return Err(LabError::param("rel", "relative step must lie in (0, 0.1]"));
    }
    let zeta = ExponentPoint::from_lambda(kappa, lambda)?.zeta;
    let draws = log_derivative_draws(
        kappa,
        t_grid,
        n_samples,
        master_seed,
        rel,
        DrivingModel::Brownian,
    );
    let values: Vec<Vec<f64>> = draws
        .iter()
        .map(|d| d.iter().map(|l| (lambda * l).exp()).collect())
        .collect();
    let stats: Vec<_> = values.iter().map(|v| mean_stderr(v)).collect();
    let log_t: Vec<f64> = t_grid.iter().map(|t| t.ln()).collect();
    let fit = fit_log_mean_slope(&log_t, &values)?;
    Ok(MomentEstimate {
        kappa,
        lambda,
        t_grid: t_grid.to_vec(),
        mean: stats.iter().map(|m| m.mean).collect(),
        stderr: stats.iter().map(|m| m.stderr).collect(),
        fitted_slope: fit.slope,
        slope_stderr: fit.slope_stderr,
        expected_slope: -zeta,
        n_samples,
        seed: master_seed,
        policy: StepPolicy::new(rel, MOMENT_DT_FRACTION * t_grid[t_grid.len() - 1].powi(2)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
    /// `-log P̂(bin) / log t`; absent for empty bins.
    pub rate: Option<f64>,
    /// `ρ` at the bin centre; absent where the centre is ≤ -1.
    pub rho: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaHistogram {
    pub kappa: f64,
    pub t: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub model: DrivingModel,
    pub bins: Vec<HistogramBin>,
    /// Draws outside the binned range `[lo, hi)`.
    pub underflow: u64,
    pub overflow: u64,
    /// Centre of the fullest bin.
    pub mode: f64,
    pub beta_hash: f64,
}

pub const HISTOGRAM_RANGE: (f64, f64) = (-1.5, 1.5);

/// Histogram of `b = log|h'_{t²}(i)| / log t` against the rate function `ρ(b)`.
pub fn beta_histogram(
    kappa: f64,
    t: f64,
    n_samples: usize,
    master_seed: u64,
    model: DrivingModel,
    bin_width: f64,
) -> Result<BetaHistogram> {
    check_kappa(kappa)?;
    if !(4.0..=64.0).contains(&t) {
        return Err(LabError::param("t", format!("must lie in [4, 64], got {t}")));
    }
    check_samples(n_samples, 1)?;
    let (lo, hi) = HISTOGRAM_RANGE;
    if !(bin_width > 0.0 && bin_width <= hi - lo) {
        return Err(LabError::param("bin_width", "must be positive and below the range"));
    }
    let draws = log_derivative_draws(
        kappa,
        &[t],
        n_samples,
        master_seed,
        StepPolicy::DEFAULT_REL,
        model,
    );
    let n_bins = ((hi - lo) / bin_width).round() as usize;
    let mut counts = vec![0u64; n_bins];
    let (mut underflow, mut overflow) = (0, 0);
    let log_t = t.ln();
    for l in &draws[0] {
        let b = l / log_t;
        let k = ((b - lo) / bin_width).floor();
        if k < 0.0 {
            underflow += 1;
        } else if k as usize >= n_bins {
            overflow += 1;
        } else {
            counts[k as usize] += 1;
        }
    }
    let bins: Vec<HistogramBin> = counts
        .iter()
        .enumerate()
        .map(|(k, &count)| {
            let left = lo + bin_width * k as f64;
            let centre = left + bin_width / 2.0;
            HistogramBin {
                bin_left: left,
                bin_right: left + bin_width,
                count,
                rate: (count > 0).then(|| -(count as f64 / n_samples as f64).ln() / log_t),
                rho: rho_of_beta(kappa, centre).ok(),
            }
        })
        .collect();
    let fullest = bins
        .iter()
        .max_by_key(|b| b.count)
        .expect("at least one bin");
    Ok(BetaHistogram {
        kappa,
        t,
        n_samples,
        seed: master_seed,
        model,
        mode: (fullest.bin_left + fullest.bin_right) / 2.0,
        bins,
        underflow,
        overflow,
        beta_hash: SpectrumParams::new(kappa)?.beta_hash,
    })
}
