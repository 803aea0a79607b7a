//! Flatness checks for the reverse-flow martingale
//! `|h_t'(z)|^λ Y_t^ζ (sin arg Z_t)^{-r}` and the stopped forward-flow process
//! `M_{t∧τ_s} = S^{-r} Υ^{ξ+r} Δ^{λ+r}` with `τ_s = inf{t: Υ_t ≤ e^{-2as}}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{DrivingModel, ForwardWalker, ReverseWalker, StepPolicy};
use super::stats::mean_stderr;
use super::{check_kappa, check_samples, sample_stream};
use crate::error::{LabError, Result};
use crate::spectra::{forward_exponents, ExponentPoint, SpectrumParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    /// Times (reverse flow) or stopping levels `s` (forward flow).
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Closed-form value at the start.
    pub initial: f64,
    /// Standard error of the pathwise difference to the first grid point.
    pub diff_stderr: Vec<f64>,
    /// `max_k |mean_k - mean_0| / diff_stderr_k` over points with nonzero error.
    pub max_deviation: f64,
    /// Fraction of paths stopped by `τ_s` (forward flow only).
    pub stopped_fraction: Option<Vec<f64>>,
    pub n_samples: usize,
    pub seed: u64,
}

impl FlatnessReport {
    /// True when every mean lies within `k` standard errors of the first one.
    pub fn is_flat(&self, k: f64) -> bool {
        self.max_deviation <= k
    }

    fn from_values(
        grid: &[f64],
        values: &[Vec<f64>],
        initial: f64,
        stopped_fraction: Option<Vec<f64>>,
        seed: u64,
    ) -> Self {
        let n = values.len();
        let columns: Vec<Vec<f64>> = (0..grid.len())
            .map(|k| values.iter().map(|v| v[k]).collect())
            .collect();
        let stats: Vec<_> = columns.iter().map(|c| mean_stderr(c)).collect();
        let diff_stderr: Vec<f64> = columns
            .iter()
            .map(|c| {
                let d: Vec<f64> = c.iter().zip(&columns[0]).map(|(x, y)| x - y).collect();
                mean_stderr(&d).stderr
            })
            .collect();
        let max_deviation = stats
            .iter()
            .zip(&diff_stderr)
            .filter(|(_, &se)| se > 0.0)
            .map(|(m, se)| (m.mean - stats[0].mean).abs() / se)
            .fold(0.0, f64::max);
        Self {
            grid: grid.to_vec(),
            mean: stats.iter().map(|m| m.mean).collect(),
            stderr: stats.iter().map(|m| m.stderr).collect(),
            initial,
            diff_stderr,
            max_deviation,
            stopped_fraction,
            n_samples: n,
            seed,
        }
    }
}

fn check_grid(grid: &[f64], field: &'static str) -> Result<()> {
    if grid.is_empty() || grid[0] < 0.0 || grid.iter().any(|x| !x.is_finite()) {
        return Err(LabError::param(field, "need a nonempty grid of finite values ≥ 0"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::param(field, "grid must be strictly increasing"));
    }
    Ok(())
}

/// Mean of the reverse-flow martingale started at `iδ` along `t_grid`.
pub fn reverse_martingale_test(
    kappa: f64,
    r: f64,
    t_grid: &[f64],
    delta: f64,
    n_samples: usize,
    master_seed: u64,
) -> Result<FlatnessReport> {
    check_kappa(kappa)?;
    let p = SpectrumParams::new(kappa)?;
    if !(r < p.r_c) {
        return Err(LabError::param("r", format!("must be below r_c = {}", p.r_c)));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(LabError::param("delta", "must lie in (0, 1]"));
    }
    check_grid(t_grid, "t_grid")?;
    check_samples(n_samples, 2)?;
    let e = ExponentPoint::from_r(kappa, r)?;
    let a = 2.0 / kappa;
    let t_max = t_grid[t_grid.len() - 1];
    let policy = StepPolicy::new(StepPolicy::DEFAULT_REL, 1e-3 * t_max.max(1.0));
    let log_stat = |w: &ReverseWalker| {
        let y = w.z.im;
        let s = y / w.z.norm();
        e.lambda * w.log_deriv + e.zeta * y.ln() - r * s.ln()
    };
    let values: Vec<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_stream(master_seed, 0, i);
            let mut w = ReverseWalker::new(Complex64::new(0.0, delta), a);
            t_grid
                .iter()
                .map(|&t| {
                    w.advance_to(t, &policy, DrivingModel::Brownian, &mut rng);
                    log_stat(&w).exp()
                })
                .collect()
        })
        .collect();
    Ok(FlatnessReport::from_values(
        t_grid,
        &values,
        delta.powf(e.zeta),
        None,
        master_seed,
    ))
}

/// Mean of `M_{t_max ∧ τ_s}` for each level in `s_grid`, for `κ < 8`.
pub fn forward_martingale_test(
    kappa: f64,
    u: f64,
    z: Complex64,
    s_grid: &[f64],
    t_max: f64,
    n_samples: usize,
    master_seed: u64,
) -> Result<FlatnessReport> {
    check_kappa(kappa)?;
    let f = forward_exponents(kappa, u)?;
    if !(z.im > 0.0 && z.re.is_finite()) {
        return Err(LabError::param("z", "must lie in the upper half-plane"));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(LabError::param("t_max", "must be positive"));
    }
    check_grid(s_grid, "s_grid")?;
    check_samples(n_samples, 2)?;
    let a = 2.0 / kappa;
    let exps = f.martingale();
    let levels: Vec<f64> = s_grid.iter().map(|s| (-2.0 * a * s).exp()).collect();
    let policy = StepPolicy::new(StepPolicy::DEFAULT_REL, 1e-3 * t_max.max(1.0));
    let log_m = |w: &ForwardWalker| {
        let y = w.z.im;
        let log_delta = w.log_deriv;
        let log_ups = y.ln() - log_delta;
        exps.log_m((y / w.z.norm()).ln(), log_ups, log_delta)
    };
    let initial = {
        let w = ForwardWalker::new(z, a);
        log_m(&w).exp()
    };
    let runs: Vec<(Vec<f64>, Vec<bool>)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_stream(master_seed, 0, i);
            let mut w = ForwardWalker::new(z, a);
            let mut values = Vec::with_capacity(levels.len());
            let mut stopped = Vec::with_capacity(levels.len());
            let mut k = 0;
            loop {
                let ups = w.z.im / w.log_deriv.exp();
                while k < levels.len() && ups <= levels[k] {
                    values.push(log_m(&w).exp());
                    stopped.push(true);
                    k += 1;
                }
                if k == levels.len() || w.t >= t_max || !w.alive {
                    break;
                }
                w.step(t_max, &policy, &mut rng);
            }
            let end = log_m(&w).exp();
            while values.len() < levels.len() {
                values.push(end);
                stopped.push(false);
            }
            (values, stopped)
        })
        .collect();
    let stopped_fraction = (0..levels.len())
        .map(|k| runs.iter().filter(|r| r.1[k]).count() as f64 / n_samples as f64)
        .collect();
    let values: Vec<Vec<f64>> = runs.into_iter().map(|r| r.0).collect();
    Ok(FlatnessReport::from_values(
        s_grid,
        &values,
        initial,
        Some(stopped_fraction),
        master_seed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reverse_initial_value() {
        let rep = reverse_martingale_test(8.0 / 3.0, 1.0, &[0.0], 0.5, 10, 0).unwrap();
        let zeta = ExponentPoint::from_r(8.0 / 3.0, 1.0).unwrap().zeta;
        assert!((rep.mean[0] - 0.5f64.powf(zeta)).abs() < 1e-12);
        assert_eq!(rep.initial, 0.5f64.powf(zeta));
        assert_eq!(rep.stderr[0], 0.0);
    }

    #[test]
    fn reverse_r_zero_is_identically_one() {
        let rep = reverse_martingale_test(2.0, 0.0, &[0.0, 0.5, 1.0], 1.0, 50, 2).unwrap();
        assert!(rep.mean.iter().all(|&m| (m - 1.0).abs() < 1e-12));
        assert_eq!(rep.max_deviation, 0.0);
    }

    #[test]
    fn forward_initial_value() {
        let z = Complex64::new(0.0, 1.0);
        let rep = forward_martingale_test(2.0, 0.6, z, &[0.0], 1.0, 10, 0).unwrap();
        assert!((rep.mean[0] - 1.0).abs() < 1e-12);
        assert_eq!(rep.initial, 1.0);
        // Υ_0 = Im z = 1 = e^0: stopped immediately at s = 0
        assert_eq!(rep.stopped_fraction.unwrap()[0], 1.0);

        let w = Complex64::new(0.5, 0.5);
        let f = forward_exponents(2.0, 0.6).unwrap();
        let s0 = 0.5f64.sqrt();
        let expected = s0.powf(-f.r_u) * 0.5f64.powf(f.xi_u + f.r_u);
        let rep = forward_martingale_test(2.0, 0.6, w, &[0.0], 1.0, 10, 0).unwrap();
        assert!((rep.initial - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(reverse_martingale_test(2.0, 3.0, &[0.0], 1.0, 10, 0).is_err());
        assert!(reverse_martingale_test(2.0, 1.0, &[1.0, 0.5], 1.0, 10, 0).is_err());
        assert!(reverse_martingale_test(2.0, 1.0, &[0.0], 0.0, 10, 0).is_err());
        let z = Complex64::new(0.0, 1.0);
        assert!(forward_martingale_test(8.0, 0.6, z, &[0.0], 1.0, 10, 0).is_err());
        assert!(forward_martingale_test(2.0, 0.6, Complex64::new(0.0, 0.0), &[0.0], 1.0, 10, 0).is_err());
    }
}
