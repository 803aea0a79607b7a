//! Harmonic measure from infinity of the tip region `B(γ(t), ε) ∩ H_t`.
//!
//! Circle points around the trace tip are pushed through `g_t`. Consecutive
//! samples are joined when the image of the arc between them stays away from
//! the real line relative to its length (checked by recursive bisection);
//! the arc whose image brackets `V_t` gives `x_- < V_t < x_+` and
//! `μ(t, ε) = (x_+ - x_-)/π`. Arc ends are located by bisection on the angle.
//! Since the prime-end arc cannot be recovered from finitely many samples,
//! `[x_-, x_+]` is a lower bracket of the exact interval.

use std::cell::Cell;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stats::weighted_line;
use crate::error::{LabError, Result};
use crate::loewner::{forward_flow_with, trace_point, SlitMapChain, DEFAULT_IM_FLOOR};

/// Recursion depth of the connectivity check.
const LINK_DEPTH: u32 = 22;
/// Bisection steps used to locate an arc end.
const END_BISECTIONS: u32 = 48;
/// Image evaluations allowed per radius before links are declared broken.
const EVAL_BUDGET: u64 = 2_000_000;
/// Fewest samples an accepted arc may contain.
pub const MIN_ARC_SAMPLES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMeasureEstimate {
    pub t: f64,
    pub tip_re: f64,
    pub tip_im: f64,
    pub driving: f64,
    pub eps_grid: Vec<f64>,
    pub mu: Vec<f64>,
    pub x_minus: Vec<f64>,
    pub x_plus: Vec<f64>,
    /// Samples on the accepted arc, per radius.
    pub arc_samples: Vec<usize>,
    pub circle_samples: usize,
}

impl HarmonicMeasureEstimate {
    /// Least-squares slope of `log μ` against `log ε`.
    pub fn exponent(&self) -> Result<f64> {
        let x: Vec<f64> = self.eps_grid.iter().map(|e| e.ln()).collect();
        let y: Vec<f64> = self.mu.iter().map(|m| m.ln()).collect();
        Ok(weighted_line(&x, &y, &vec![1.0; x.len()])?.0)
    }
}

struct Circle<'a> {
    chain: &'a SlitMapChain,
    t_steps: usize,
    centre: Complex64,
    radius: f64,
    evals: Cell<u64>,
}

impl Circle<'_> {
    fn image(&self, theta: f64) -> Option<Complex64> {
        self.evals.set(self.evals.get() + 1);
        let w = self.centre + Complex64::from_polar(self.radius, theta);
        if !(w.im > 0.0) {
            return None;
        }
        let r = forward_flow_with(self.chain, w, self.t_steps, DEFAULT_IM_FLOOR);
        r.survived.then_some(r.value)
    }

    fn linked(&self, t1: f64, g1: Complex64, t2: f64, g2: Complex64, depth: u32) -> bool {
        if (g1 - g2).norm() <= g1.im.max(g2.im) {
            return true;
        }
        if depth == 0 || self.evals.get() > EVAL_BUDGET {
            return false;
        }
        let tm = 0.5 * (t1 + t2);
        match self.image(tm) {
            Some(gm) => {
                self.linked(t1, g1, tm, gm, depth - 1) && self.linked(tm, gm, t2, g2, depth - 1)
            }
            None => false,
        }
    }

    /// Last point still linked to `good` on the way to `bad`.
    fn arc_end(&self, mut good: f64, mut g_good: Complex64, mut bad: f64) -> Complex64 {
        for _ in 0..END_BISECTIONS {
            let mid = 0.5 * (good + bad);
            match self.image(mid) {
                Some(gm) if self.linked(good, g_good, mid, gm, LINK_DEPTH) => {
                    good = mid;
                    g_good = gm;
                }
                _ => bad = mid,
            }
        }
        g_good
    }
}

/// `(x_-, x_+, samples on arc)` for one radius.
fn bracket(circle: &Circle, m: usize, v_t: f64) -> Result<(f64, f64, usize)> {
    let theta = |k: usize| TAU * (k as f64 + 0.5) / m as f64 - PI / 2.0;
    let images: Vec<Option<Complex64>> = (0..m).map(|k| circle.image(theta(k))).collect();
    // link[k] joins sample k to sample k+1 (cyclically)
    let link: Vec<bool> = (0..m)
        .map(|k| {
            let k1 = (k + 1) % m;
            let t2 = if k1 == 0 { theta(0) + TAU } else { theta(k1) };
            match (images[k], images[k1]) {
                (Some(a), Some(b)) => circle.linked(theta(k), a, t2, b, LINK_DEPTH),
                _ => false,
            }
        })
        .collect();
    let Some(cut) = link.iter().position(|l| !l) else {
        return Err(LabError::DegenerateArc(
            "the circle does not meet the boundary; is the radius too small?".into(),
        ));
    };
    let mut best: Option<(f64, f64, usize)> = None;
    // walk the circle once, starting just after a broken link
    let mut k = (cut + 1) % m;
    let mut visited = 0;
    while visited < m {
        if images[k].is_none() {
            k = (k + 1) % m;
            visited += 1;
            continue;
        }
        let start = visited;
        let first = k;
        while link[k] && visited < m - 1 {
            k = (k + 1) % m;
            visited += 1;
        }
        let last = k;
        let count = visited - start + 1;
        k = (k + 1) % m;
        visited += 1;

        let t_first = theta(first);
        let t_last = t_first + TAU * (count - 1) as f64 / m as f64;
        let step = TAU / m as f64;
        let left = circle.arc_end(t_first, images[first].expect("valid"), t_first - step);
        let right = circle.arc_end(t_last, images[last].expect("valid"), t_last + step);
        let (lo, hi) = if left.re <= right.re {
            (left.re, right.re)
        } else {
            (right.re, left.re)
        };
        if count >= MIN_ARC_SAMPLES
            && lo < v_t
            && v_t < hi
            && best.is_none_or(|(blo, bhi, _)| hi - lo > bhi - blo)
        {
            best = Some((lo, hi, count));
        }
    }
    best.ok_or_else(|| {
        LabError::DegenerateArc(format!(
            "no arc with at least {MIN_ARC_SAMPLES} samples brackets V_t = {v_t}"
        ))
    })
}

/// `μ(t, ε)` for every radius in `eps_grid` (strictly increasing).
pub fn estimate_tip_harmonic_measure(
    chain: &SlitMapChain,
    t_steps: usize,
    eps_grid: &[f64],
    circle_samples: usize,
) -> Result<HarmonicMeasureEstimate> {
    if t_steps == 0 || t_steps > chain.len() {
        return Err(LabError::param("t_steps", format!("must lie in 1..={}", chain.len())));
    }
    if eps_grid.is_empty()
        || eps_grid.iter().any(|e| !(*e > 0.0 && e.is_finite()))
        || eps_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(LabError::param("eps_grid", "radii must be positive and increasing"));
    }
    if circle_samples < 4 * MIN_ARC_SAMPLES {
        return Err(LabError::param(
            "circle_samples",
            format!("need at least {}", 4 * MIN_ARC_SAMPLES),
        ));
    }
    let tip = trace_point(chain, t_steps, None)?;
    let v_t = chain.driving_at(t_steps);
    let mut out = HarmonicMeasureEstimate {
        t: chain.time_at(t_steps),
        tip_re: tip.re,
        tip_im: tip.im,
        driving: v_t,
        eps_grid: eps_grid.to_vec(),
        mu: Vec::new(),
        x_minus: Vec::new(),
        x_plus: Vec::new(),
        arc_samples: Vec::new(),
        circle_samples,
    };
    for &eps in eps_grid {
        let circle = Circle {
            chain,
            t_steps,
            centre: tip,
            radius: eps,
            evals: Cell::new(0),
        };
        let (lo, hi, count) = bracket(&circle, circle_samples, v_t)?;
        out.x_minus.push(lo);
        out.x_plus.push(hi);
        out.mu.push((hi - lo) / PI);
        out.arc_samples.push(count);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driving::{deterministic_driver, DriverKind};

    fn slit_chain(t: f64, n: usize) -> SlitMapChain {
        SlitMapChain::from_path(&deterministic_driver(DriverKind::Constant, 2.0, n, t / n as f64).unwrap())
    }

    #[test]
    fn vertical_slit_small_radius() {
        // a = 1, t = 0.5: slit [0, i]. The circle about ic meets the slit at
        // i(c - ε), which g_t sends to ±√(1 - (c - ε)²).
        let chain = slit_chain(0.5, 256);
        let eps = [1e-3, 4e-3, 1.6e-2, 6.4e-2];
        let est = estimate_tip_harmonic_measure(&chain, 256, &eps, 256).unwrap();
        assert_eq!(est.tip_re, 0.0);
        let c = est.tip_im;
        for (k, &e) in eps.iter().enumerate() {
            let exact = 2.0 * (1.0 - (c - e) * (c - e)).sqrt() / PI;
            assert!((est.mu[k] - exact).abs() < 1e-6 * exact, "{} vs {exact}", est.mu[k]);
            assert!(est.x_minus[k] < 0.0 && est.x_plus[k] > 0.0);
        }
        assert!(est.mu.windows(2).all(|w| w[1] >= w[0]));
        assert!((est.exponent().unwrap() - 0.5).abs() < 0.05);
    }

    #[test]
    fn vertical_slit_large_radius() {
        let chain = slit_chain(0.5, 64);
        let est = estimate_tip_harmonic_measure(&chain, 64, &[1.5, 3.0], 128).unwrap();
        // the circle meets ℝ at ±√(ε² - c²), sent to ±√(ε² - c² + 1)
        let c = est.tip_im;
        for (k, e) in [1.5f64, 3.0].iter().enumerate() {
            let exact = 2.0 * (e * e - c * c + 1.0).sqrt() / PI;
            assert!((est.mu[k] / exact - 1.0).abs() < 1e-6);
            assert!((est.mu[k] / (2.0 * e / PI) - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let chain = slit_chain(0.5, 16);
        assert!(estimate_tip_harmonic_measure(&chain, 0, &[0.1], 64).is_err());
        assert!(estimate_tip_harmonic_measure(&chain, 16, &[0.1, 0.05], 64).is_err());
        assert!(estimate_tip_harmonic_measure(&chain, 16, &[0.1], 8).is_err());
    }
}
