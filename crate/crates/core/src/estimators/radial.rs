//! Euler–Maruyama simulation of `dΘ = b·cot Θ dt + dW` on `(0, π)` with
//! `b = 1 - 2a - r(u)`, compared with the invariant density `∝ sin^{2b} θ`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::stats::mean_stderr;
use super::{check_kappa, check_samples, sample_stream};
use crate::error::{LabError, Result};
use crate::spectra::forward_exponents;

pub const RADIAL_DT: f64 = 1e-3;
pub const RADIAL_BINS: usize = 24;
/// Halvings allowed when a step would leave `(0, π)`.
const MAX_SPLITS: u32 = 40;
/// Checkpoints (as fractions of `t_max`) for `E[S_t^r]`.
const MOMENT_FRACTIONS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
    pub expected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialReport {
    pub kappa: f64,
    pub u: f64,
    pub r: f64,
    /// Drift coefficient `b = 1 - 2a - r`.
    pub drift: f64,
    pub theta0: f64,
    pub t_max: f64,
    pub dt: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub bins: Vec<DensityBin>,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Smallest and largest angle visited by any path.
    pub theta_min: f64,
    pub theta_max: f64,
    pub mean_theta: f64,
    pub moment_times: Vec<f64>,
    /// `E[S_t^r]` with `S = sin Θ`.
    pub moment_mean: Vec<f64>,
    pub moment_stderr: Vec<f64>,
}

/// Advances `theta` by `dt` with increment `dw`, halving the step through a
/// Brownian bridge while the proposal leaves `(0, π)`.
fn em_step<R: Rng>(theta: f64, b: f64, dt: f64, dw: f64, rng: &mut R, depth: u32) -> f64 {
    let next = theta + b * dt / theta.tan() + dw;
    if (next > 0.0 && next < PI) || depth == MAX_SPLITS {
        return next.clamp(f64::MIN_POSITIVE, PI - f64::EPSILON);
    }
    let half = dt / 2.0;
    let z: f64 = rng.sample(StandardNormal);
    let dw1 = dw / 2.0 + (dt / 4.0).sqrt() * z;
    let mid = em_step(theta, b, half, dw1, rng, depth + 1);
    em_step(mid, b, half, dw - dw1, rng, depth + 1)
}

/// `∫_lo^hi sin^{2b} θ dθ` by composite Simpson.
fn sin_power_integral(lo: f64, hi: f64, b: f64) -> f64 {
    let n = 2000;
    let h = (hi - lo) / n as f64;
    let f = |x: f64| x.sin().powf(2.0 * b);
    let mut s = f(lo) + f(hi);
    for k in 1..n {
        s += f(lo + h * k as f64) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Merges neighbouring bins until every expected count is at least 5.
fn merge_sparse(bins: &[DensityBin]) -> Vec<DensityBin> {
    let mut out: Vec<DensityBin> = Vec::new();
    let mut acc: Option<DensityBin> = None;
    for b in bins {
        let cur = match acc.take() {
            Some(a) => DensityBin {
                bin_left: a.bin_left,
                bin_right: b.bin_right,
                count: a.count + b.count,
                expected: a.expected + b.expected,
            },
            None => *b,
        };
        if cur.expected >= 5.0 {
            out.push(cur);
        } else {
            acc = Some(cur);
        }
    }
    if let Some(rest) = acc {
        match out.last_mut() {
            Some(last) => {
                last.bin_right = rest.bin_right;
                last.count += rest.count;
                last.expected += rest.expected;
            }
            None => out.push(rest),
        }
    }
    out
}

pub fn radial_theta_simulate(
    kappa: f64,
    u: f64,
    theta0: f64,
    t_max: f64,
    n_samples: usize,
    master_seed: u64,
) -> Result<RadialReport> {
    check_kappa(kappa)?;
    let f = forward_exponents(kappa, u)?;
    let a = 2.0 / kappa;
    let b = 1.0 - 2.0 * a - f.r_u;
    if !(b > 0.5) {
        return Err(LabError::param(
            "u",
            format!("drift 1 - 2a - r = {b} must exceed 1/2 for the Bessel comparison"),
        ));
    }
    if !(theta0 > 0.0 && theta0 < PI) {
        return Err(LabError::param("theta0", "must lie in (0, π)"));
    }
    if !(t_max >= RADIAL_DT && t_max.is_finite()) {
        return Err(LabError::param("t_max", format!("must be at least {RADIAL_DT}")));
    }
    check_samples(n_samples, 2)?;

    let n_steps = (t_max / RADIAL_DT).round() as usize;
    let checkpoints: Vec<usize> = MOMENT_FRACTIONS
        .iter()
        .map(|q| ((q * n_steps as f64).round() as usize).max(1))
        .collect();
    let paths: Vec<(Vec<f64>, f64, f64)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_stream(master_seed, 0, i);
            let mut theta = theta0;
            let (mut lo, mut hi) = (theta0, theta0);
            let mut marks = Vec::with_capacity(checkpoints.len());
            let mut next = 0;
            for step in 1..=n_steps {
                let dw = RADIAL_DT.sqrt() * rng.sample::<f64, _>(StandardNormal);
                theta = em_step(theta, b, RADIAL_DT, dw, &mut rng, 0);
                lo = lo.min(theta);
                hi = hi.max(theta);
                while next < checkpoints.len() && checkpoints[next] == step {
                    marks.push(theta);
                    next += 1;
                }
            }
            (marks, lo, hi)
        })
        .collect();

    let finals: Vec<f64> = paths.iter().map(|p| *p.0.last().expect("checkpoint")).collect();
    let width = PI / RADIAL_BINS as f64;
    let total = sin_power_integral(0.0, PI, b);
    let mut bins: Vec<DensityBin> = (0..RADIAL_BINS)
        .map(|k| {
            let left = width * k as f64;
            let right = left + width;
            DensityBin {
                bin_left: left,
                bin_right: right,
                count: 0,
                expected: n_samples as f64 * sin_power_integral(left, right, b) / total,
            }
        })
        .collect();
    for &th in &finals {
        let k = ((th / width) as usize).min(RADIAL_BINS - 1);
        bins[k].count += 1;
    }
    let merged = merge_sparse(&bins);
    let chi_square: f64 = merged
        .iter()
        .map(|b| (b.count as f64 - b.expected).powi(2) / b.expected)
        .sum();
    let dof = merged.len().saturating_sub(1).max(1);
    let p_value = 1.0 - ChiSquared::new(dof as f64).expect("dof ≥ 1").cdf(chi_square);

    let moment_times: Vec<f64> = checkpoints.iter().map(|&c| c as f64 * RADIAL_DT).collect();
    let (moment_mean, moment_stderr) = (0..checkpoints.len())
        .map(|k| {
            let v: Vec<f64> = paths.iter().map(|p| p.0[k].sin().powf(f.r_u)).collect();
            let m = mean_stderr(&v);
            (m.mean, m.stderr)
        })
        .unzip();
    Ok(RadialReport {
        kappa,
        u,
        r: f.r_u,
        drift: b,
        theta0,
        t_max,
        dt: RADIAL_DT,
        n_samples,
        seed: master_seed,
        bins,
        chi_square,
        dof,
        p_value,
        theta_min: paths.iter().map(|p| p.1).fold(PI, f64::min),
        theta_max: paths.iter().map(|p| p.2).fold(0.0, f64::max),
        mean_theta: mean_stderr(&finals).mean,
        moment_times,
        moment_mean,
        moment_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_power_normalisation() {
        // ∫_0^π sin^6 = 5π/16
        assert!((sin_power_integral(0.0, PI, 3.0) - 5.0 * PI / 16.0).abs() < 1e-12);
    }

    #[test]
    fn merge_keeps_totals() {
        let bins: Vec<DensityBin> = [0.5, 1.0, 10.0, 20.0, 3.0]
            .iter()
            .enumerate()
            .map(|(k, &e)| DensityBin {
                bin_left: k as f64,
                bin_right: k as f64 + 1.0,
                count: k as u64,
                expected: e,
            })
            .collect();
        let m = merge_sparse(&bins);
        assert!(m.iter().all(|b| b.expected >= 5.0));
        assert_eq!(m.iter().map(|b| b.count).sum::<u64>(), 10);
        assert_eq!(m[0].bin_left, 0.0);
        assert_eq!(m.last().unwrap().bin_right, 5.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        // b = 1/2 + 1/(4u - 2), so only u ≤ 1/2 breaks the comparison
        let rep = radial_theta_simulate(7.9, 50.0, 1.5, 0.01, 4, 0).unwrap();
        assert!((rep.drift - (0.5 + 1.0 / 198.0)).abs() < 1e-12);
        assert!(radial_theta_simulate(2.0, 0.5, 1.5, 0.1, 10, 0).is_err());
        assert!(radial_theta_simulate(2.0, 0.6, 0.0, 0.1, 10, 0).is_err());
    }

    #[test]
    fn stays_inside_and_symmetric() {
        let rep = radial_theta_simulate(2.0, 0.6, PI / 2.0, 1.0, 2000, 5).unwrap();
        assert_eq!(rep.drift, 3.0);
        assert!(rep.theta_min > 0.0 && rep.theta_max < PI);
        assert!((rep.mean_theta - PI / 2.0).abs() < 0.05);
        assert!(rep.p_value > 1e-3);
    }
}
