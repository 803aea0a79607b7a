//! Order-independent summaries and log-log slope fits.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Sample mean and its standard error.
pub fn mean_stderr(values: &[f64]) -> MeanEstimate {
    let n = values.len();
    if n == 0 {
        return MeanEstimate {
            mean: f64::NAN,
            stderr: f64::NAN,
            n,
        };
    }
    let mean = compensated_sum(values.iter().copied()) / n as f64;
    if n == 1 {
        return MeanEstimate {
            mean,
            stderr: 0.0,
            n,
        };
    }
    let ss = compensated_sum(values.iter().map(|x| (x - mean) * (x - mean)));
    MeanEstimate {
        mean,
        stderr: (ss / ((n - 1) * n) as f64).sqrt(),
        n,
    }
}

/// Weighted least-squares line `y = intercept + slope·x`.
pub fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() != w.len() || x.len() < 2 {
        return Err(LabError::param("grid", "need at least two matching points to fit a line"));
    }
    let sw = compensated_sum(w.iter().copied());
    let mx = compensated_sum(x.iter().zip(w).map(|(a, b)| a * b)) / sw;
    let my = compensated_sum(y.iter().zip(w).map(|(a, b)| a * b)) / sw;
    let sxx = compensated_sum(x.iter().zip(w).map(|(a, b)| b * (a - mx) * (a - mx)));
    let sxy = compensated_sum(
        x.iter()
            .zip(y)
            .zip(w)
            .map(|((a, c), b)| b * (a - mx) * (c - my)),
    );
    if !(sxx > 0.0) {
        return Err(LabError::param("grid", "abscissae must not all coincide"));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Delete-one jackknife standard error of the slope.
    pub slope_stderr: f64,
    pub weighted: bool,
}

/// Fits `log(mean_j) = c + slope·x_j` where `samples[j]` are the draws at `x_j`.
///
/// Every grid point must carry the same number of draws; draw `i` of every
/// grid point forms jackknife group `i`. Weights `mean²/stderr²` are fixed
/// from the full sample; when any standard error vanishes the fit is
/// unweighted.
pub fn fit_log_mean_slope(x: &[f64], samples: &[Vec<f64>]) -> Result<SlopeFit> {
    if x.len() != samples.len() || x.len() < 2 {
        return Err(LabError::param("grid", "need at least two grid points"));
    }
    let n = samples[0].len();
    if n < 2 || samples.iter().any(|s| s.len() != n) {
        return Err(LabError::param("samples", "need equal sample counts of at least two"));
    }
    let sums: Vec<f64> = samples.iter().map(|s| compensated_sum(s.iter().copied())).collect();
    let stats: Vec<MeanEstimate> = samples.iter().map(|s| mean_stderr(s)).collect();
    if stats.iter().any(|m| !(m.mean > 0.0)) {
        return Err(LabError::Domain("log-mean fit needs positive means".into()));
    }
    let weighted = stats.iter().all(|m| m.stderr > 0.0);
    let w: Vec<f64> = if weighted {
        stats.iter().map(|m| (m.mean / m.stderr).powi(2)).collect()
    } else {
        vec![1.0; x.len()]
    };
    let y: Vec<f64> = stats.iter().map(|m| m.mean.ln()).collect();
    let (slope, intercept) = weighted_line(x, &y, &w)?;

    let mut loo = Vec::with_capacity(n);
    let mut yi = vec![0.0; x.len()];
    for i in 0..n {
        for j in 0..x.len() {
            let m = (sums[j] - samples[j][i]) / (n - 1) as f64;
            yi[j] = if m > 0.0 { m.ln() } else { f64::NEG_INFINITY };
        }
        if yi.iter().all(|v| v.is_finite()) {
            loo.push(weighted_line(x, &yi, &w)?.0);
        }
    }
    Ok(SlopeFit {
        slope,
        intercept,
        slope_stderr: jackknife_stderr(&loo),
        weighted,
    })
}

/// `√((n-1)/n · Σ (θ_i - θ̄)²)`.
pub fn jackknife_stderr(leave_one_out: &[f64]) -> f64 {
    let n = leave_one_out.len();
    if n < 2 {
        return 0.0;
    }
    let mean = compensated_sum(leave_one_out.iter().copied()) / n as f64;
    let ss = compensated_sum(leave_one_out.iter().map(|v| (v - mean) * (v - mean)));
    ((n - 1) as f64 / n as f64 * ss).sqrt()
}
