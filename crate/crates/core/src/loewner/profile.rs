//! Tip profiles `y ↦ |f̂_t'(iy)|`, the arc length `v_t(y)` of `f̂_t((0, iy])`,
//! and trace points `γ(t) ≈ f̂_t(i·y_min)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chain::SlitMapChain;
use super::flow::{shifted_inverse, shifted_inverse_deriv};
use crate::error::{LabError, Result};

/// Quadrature nodes per octave of `y`.
const NODES_PER_OCTAVE: usize = 32;
/// Octaves below the slit scale of the last step where integration stops.
const FLOOR_OCTAVES: i32 = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TipProfile {
    /// Strictly descending heights in `(0, 1]`.
    pub y_grid: Vec<f64>,
    /// `|f̂_t'(iy)|` at each height.
    pub deriv_mod: Vec<f64>,
    /// `v_t(y)` at each height.
    pub v_cum: Vec<f64>,
}

fn check_grid(y_grid: &[f64]) -> Result<()> {
    if y_grid.is_empty() {
        return Err(LabError::param("y_grid", "empty grid"));
    }
    if y_grid.iter().any(|&y| !(y > 0.0 && y <= 1.0)) {
        return Err(LabError::param("y_grid", "heights must lie in (0, 1]"));
    }
    if y_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::param("y_grid", "heights must be strictly descending"));
    }
    Ok(())
}

/// Height below which `f̂_t` looks like a single vertical slit: `√(2a·dt)` of
/// the last applied step.
fn slit_scale(chain: &SlitMapChain, t_steps: usize) -> f64 {
    let k = t_steps.max(1) - 1;
    (2.0 * chain.a() * chain.steps()[k].dt()).sqrt()
}

/// Integration floor for `v_t`. Below it `|f̂_t'(iy)|` is linear in `y`.
fn integration_floor(chain: &SlitMapChain, t_steps: usize, y_min: f64) -> f64 {
    slit_scale(chain, t_steps).min(y_min) * 2f64.powi(-FLOOR_OCTAVES)
}

/// `v_t(y)` at every height in `heights` (any order).
///
/// Composite trapezoid in `ln y` on a geometric grid refined to
/// [`NODES_PER_OCTAVE`] nodes per octave, plus the exact tail
/// `∫_0^{y_f} c·s ds = y_f·|f̂'(iy_f)|/2` of the slit-like regime.
fn arc_lengths(chain: &SlitMapChain, t_steps: usize, heights: &[f64]) -> Result<Vec<f64>> {
    if t_steps == 0 {
        return Ok(heights.to_vec());
    }
    let y_min = heights.iter().copied().fold(f64::INFINITY, f64::min);
    let y_max = heights.iter().copied().fold(0.0, f64::max);
    let floor = integration_floor(chain, t_steps, y_min);
    let du = std::f64::consts::LN_2 / NODES_PER_OCTAVE as f64;
    let mut nodes: Vec<f64> = Vec::new();
    let mut u = floor.ln();
    while u < y_max.ln() {
        nodes.push(u.exp());
        u += du;
    }
    nodes.extend_from_slice(heights);
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite heights"));
    nodes.dedup();

    let weights = nodes
        .iter()
        .map(|&y| Ok(shifted_inverse_deriv(chain, y, t_steps)? * y))
        .collect::<Result<Vec<f64>>>()?;
    let mut cumulative = Vec::with_capacity(nodes.len());
    let mut acc = weights[0] / 2.0;
    cumulative.push(acc);
    for k in 1..nodes.len() {
        let h = (nodes[k] / nodes[k - 1]).ln();
        acc += 0.5 * h * (weights[k] + weights[k - 1]);
        cumulative.push(acc);
    }
    Ok(heights
        .iter()
        .map(|y| {
            let idx = nodes
                .binary_search_by(|n| n.partial_cmp(y).expect("finite"))
                .expect("heights are quadrature nodes");
            cumulative[idx]
        })
        .collect())
}

/// Tip profile of `f̂_t` after `t_steps` steps.
pub fn tip_profile(chain: &SlitMapChain, t_steps: usize, y_grid: &[f64]) -> Result<TipProfile> {
    chain.check_steps(t_steps)?;
    check_grid(y_grid)?;
    let deriv_mod = y_grid
        .iter()
        .map(|&y| shifted_inverse_deriv(chain, y, t_steps))
        .collect::<Result<Vec<_>>>()?;
    let v_cum = arc_lengths(chain, t_steps, y_grid)?;
    Ok(TipProfile {
        y_grid: y_grid.to_vec(),
        deriv_mod,
        v_cum,
    })
}

/// `Σ_{j ≥ n} 2^{-j} |f̂_t'(i2^{-j})|`, summed down to the integration floor
/// with the geometric tail of the slit-like regime added.
pub fn dyadic_sum(chain: &SlitMapChain, t_steps: usize, n: u32) -> Result<f64> {
    chain.check_steps(t_steps)?;
    let y0 = 2f64.powi(-(n as i32));
    if t_steps == 0 {
        return Ok(2.0 * y0);
    }
    let floor = integration_floor(chain, t_steps, y0);
    let mut sum = 0.0;
    let mut y = y0;
    let mut last = 0.0;
    while y >= floor {
        last = y * shifted_inverse_deriv(chain, y, t_steps)?;
        sum += last;
        y /= 2.0;
    }
    // |f̂'(iy)| ∝ y below the floor, so the remaining terms shrink by 4 each
    Ok(sum + last / 3.0)
}

/// Default trace height `√dt / 8` for the step ending at `t_steps`.
pub fn default_trace_height(chain: &SlitMapChain, t_steps: usize) -> f64 {
    let k = t_steps.max(1) - 1;
    chain.steps()[k].dt().sqrt() / 8.0
}

/// `γ(t) ≈ f̂_t(i·y_min)`; `y_min` defaults to [`default_trace_height`].
pub fn trace_point(chain: &SlitMapChain, t_steps: usize, y_min: Option<f64>) -> Result<Complex64> {
    let y = y_min.unwrap_or_else(|| default_trace_height(chain, t_steps));
    if !(y > 0.0 && y.is_finite()) {
        return Err(LabError::param("y_min", format!("must be positive, got {y}")));
    }
    Ok(shifted_inverse(chain, Complex64::new(0.0, y), t_steps)?.value)
}

/// Trace point together with `v_t(y_min)`, which bounds `|γ(t) - f̂_t(i·y_min)|`.
pub fn trace_point_with_bound(
    chain: &SlitMapChain,
    t_steps: usize,
    y_min: Option<f64>,
) -> Result<(Complex64, f64)> {
    let y = y_min.unwrap_or_else(|| default_trace_height(chain, t_steps));
    let point = trace_point(chain, t_steps, Some(y))?;
    chain.check_steps(t_steps)?;
    let bound = arc_lengths(chain, t_steps, &[y])?[0];
    Ok((point, bound))
}

/// Trace `γ(t_k)` at every step boundary `k = 0..=n`.
pub fn trace(chain: &SlitMapChain, y_min: Option<f64>) -> Result<Vec<(f64, Complex64)>> {
    (0..=chain.len())
        .map(|k| Ok((chain.time_at(k), trace_point(chain, k, y_min)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driving::{deterministic_driver, sample_brownian, DriverKind};
    use crate::loewner::chain::DrivingStep;

    fn dyadic_grid(n: i32) -> Vec<f64> {
        (0..=n).map(|j| 2f64.powi(-j)).collect()
    }

    #[test]
    fn identity_profile() {
        let chain = SlitMapChain::new(1.0, vec![DrivingStep::new(0.1, 0.0).unwrap()]).unwrap();
        let grid = dyadic_grid(5);
        let p = tip_profile(&chain, 0, &grid).unwrap();
        assert!(p.deriv_mod.iter().all(|&d| d == 1.0));
        assert_eq!(p.v_cum, grid);
    }

    #[test]
    fn single_slit_profile_matches_closed_form() {
        // f̂(z) = √(z² - c): |f̂'(iy)| = y/√(y²+c), v(y) = √(y²+c) - √c
        let (a, dt) = (1.0, 0.02);
        let c = 2.0 * a * dt;
        let chain = SlitMapChain::new(a, vec![DrivingStep::new(dt, 0.0).unwrap()]).unwrap();
        let grid = dyadic_grid(10);
        let p = tip_profile(&chain, 1, &grid).unwrap();
        for k in 0..grid.len() {
            let y = grid[k];
            let d = y / (y * y + c).sqrt();
            let v = (y * y + c).sqrt() - c.sqrt();
            assert!((p.deriv_mod[k] - d).abs() < 1e-13 * d.max(1.0));
            assert!((p.v_cum[k] - v).abs() < 2e-4 * v, "y={y}: {} vs {v}", p.v_cum[k]);
            assert!(p.v_cum[k] >= y * p.deriv_mod[k] / 2.0);
        }
    }

    #[test]
    fn brownian_profile_invariants() {
        for seed in 0..10 {
            let path = sample_brownian(2.0, 512, 1.0 / 512.0, seed).unwrap();
            let chain = SlitMapChain::from_path(&path);
            let grid = dyadic_grid(10);
            let p = tip_profile(&chain, chain.len(), &grid).unwrap();
            for k in 0..grid.len() {
                assert!(p.v_cum[k] >= grid[k] * p.deriv_mod[k] / 2.0);
                if k > 0 {
                    assert!(p.v_cum[k] <= p.v_cum[k - 1]);
                }
                let sum = dyadic_sum(&chain, chain.len(), k as u32).unwrap();
                let ratio = p.v_cum[k] / sum;
                assert!((3.0 / 8.0..=1.5).contains(&ratio), "ratio {ratio}");
            }
        }
    }

    #[test]
    fn vertical_slit_trace() {
        // V ≡ 0, a = 1, t = 0.5: the slit tip is i
        let path = deterministic_driver(DriverKind::Constant, 2.0, 512, 0.5 / 512.0).unwrap();
        let chain = SlitMapChain::from_path(&path);
        let y_min = default_trace_height(&chain, chain.len());
        let tip = trace_point(&chain, chain.len(), None).unwrap();
        assert!((tip - Complex64::new(0.0, 1.0)).norm() <= 2.0 * y_min);

        let start = trace_point(&chain, 0, Some(1e-3)).unwrap();
        assert_eq!(start, Complex64::new(0.0, 1e-3));
    }

    #[test]
    fn halving_y_min_moves_trace_less_than_arc_length() {
        let path = sample_brownian(8.0 / 3.0, 256, 1.0 / 256.0, 3).unwrap();
        let chain = SlitMapChain::from_path(&path);
        for k in [1, 50, 256] {
            let y = default_trace_height(&chain, k);
            let (p, bound) = trace_point_with_bound(&chain, k, Some(y)).unwrap();
            let q = trace_point(&chain, k, Some(y / 2.0)).unwrap();
            assert!((p - q).norm() <= bound, "{} > {bound}", (p - q).norm());
        }
    }

    #[test]
    fn sle_trace_stays_in_closed_half_plane() {
        let path = sample_brownian(8.0 / 3.0, 1 << 12, 1.0 / f64::from(1 << 12), 21).unwrap();
        let chain = SlitMapChain::from_path(&path);
        let tr = trace(&chain, None).unwrap();
        assert_eq!(tr.len(), chain.len() + 1);
        assert!(tr.iter().all(|(_, z)| z.im >= 0.0));
        let y0 = default_trace_height(&chain, 0);
        assert!((tr[0].1 - Complex64::new(path.values()[0], y0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        let chain = SlitMapChain::new(1.0, vec![DrivingStep::new(0.1, 0.0).unwrap()]).unwrap();
        assert!(tip_profile(&chain, 1, &[0.5, 1.0]).is_err());
        assert!(tip_profile(&chain, 1, &[2.0]).is_err());
        assert!(tip_profile(&chain, 2, &[1.0]).is_err());
    }
}
