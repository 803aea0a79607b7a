//! Spectrum tables and the plot data of the tip spectrum curves.

use serde::{Deserialize, Serialize};

use super::{f_bulk, f_tip, rho_of_beta, two_minus_rho_parts, SpectrumParams};
use crate::error::{LabError, Result};

/// Right end of the α grid when `α_+ = ∞` (κ = 8).
const ALPHA_CAP: f64 = 64.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub dhat: f64,
    pub dbeta: f64,
    pub f_tip: f64,
    /// Conjectural bulk spectrum at the same α.
    pub f_bulk: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Figure1Curve {
    pub kappa: f64,
    pub d: f64,
    pub alpha_star: f64,
    pub max_value: f64,
    pub alpha_at_max: f64,
    pub alpha: Vec<f64>,
    pub f_tip: Vec<f64>,
}

/// Uniform α grid on `[α_-, α_+]` (capped at [`ALPHA_CAP`]) with `α_*` inserted.
fn alpha_grid(p: &SpectrumParams, n_points: usize) -> Result<Vec<f64>> {
    if n_points < 2 {
        return Err(LabError::param("n_points", "need at least two grid points"));
    }
    let hi = p.alpha_plus.min(ALPHA_CAP);
    let lo = p.alpha_minus;
    let step = (hi - lo) / (n_points - 1) as f64;
    let mut grid: Vec<f64> = (0..n_points).map(|k| lo + step * k as f64).collect();
    grid[n_points - 1] = hi;
    if p.alpha_star < hi {
        grid.push(p.alpha_star);
        grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
        grid.dedup();
    }
    Ok(grid)
}

/// One table row at `α > 1/2` with `1 - β = 1/α` in `[1 - β_+, 1 - β_-]`.
pub fn spectrum_row(kappa: f64, alpha: f64) -> Result<SpectrumRow> {
    let p = SpectrumParams::new(kappa)?;
    row_at(&p, alpha)
}

fn row_at(p: &SpectrumParams, alpha: f64) -> Result<SpectrumRow> {
    let kappa = p.kappa;
    if !(alpha >= p.alpha_minus * (1.0 - 1e-12) && alpha <= p.alpha_plus * (1.0 + 1e-12)) {
        return Err(LabError::param(
            "alpha",
            format!("must lie in [α_-, α_+] = [{}, {}], got {alpha}", p.alpha_minus, p.alpha_plus),
        ));
    }
    let w = 1.0 / alpha;
    let beta = 1.0 - w;
    let (two_minus_rho, dbeta) = two_minus_rho_parts(p, w);
    Ok(SpectrumRow {
        alpha,
        beta,
        rho: rho_of_beta(kappa, beta)?,
        dhat: two_minus_rho / 2.0,
        dbeta,
        f_tip: f_tip(kappa, alpha)?,
        f_bulk: f_bulk(kappa, alpha)?,
    })
}

/// Table of `ρ, d̂_β, d_β, F_tip, F_bulk` over the α grid of [`alpha_grid`].
pub fn spectrum_table(kappa: f64, n_points: usize) -> Result<Vec<SpectrumRow>> {
    let p = SpectrumParams::new(kappa)?;
    alpha_grid(&p, n_points)?
        .into_iter()
        .map(|alpha| row_at(&p, alpha))
        .collect()
}

/// One `F_tip` curve per κ, each κ in `(0, 8]`.
pub fn figure1_curves(kappas: &[f64], n_points: usize) -> Result<Vec<Figure1Curve>> {
    kappas
        .iter()
        .map(|&kappa| {
            if !(kappa > 0.0 && kappa <= 8.0) {
                return Err(LabError::Domain(format!("curve needs κ in (0, 8], got {kappa}")));
            }
            let p = SpectrumParams::new(kappa)?;
            let alpha = alpha_grid(&p, n_points)?;
            let values = alpha
                .iter()
                .map(|&x| f_tip(kappa, x))
                .collect::<Result<Vec<_>>>()?;
            let (imax, &max_value) = values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite values"))
                .expect("nonempty grid");
            Ok(Figure1Curve {
                kappa,
                d: p.d,
                alpha_star: p.alpha_star,
                max_value,
                alpha_at_max: alpha[imax],
                alpha,
                f_tip: values,
            })
        })
        .collect()
}
