//! Observables of a single point under the forward flow.
//!
//! With `Z_t = g_t(z) - V_t = X_t + iY_t`:
//! `Θ_t = arg Z_t`, `S_t = sin Θ_t`, `Δ_t = |g_t'(z)|`, `Υ_t = Y_t / Δ_t` and
//! `M_t = S_t^{-r} Υ_t^{ξ+r} Δ_t^{λ+r}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chain::{HalfPlanePoint, SlitMapChain};
use super::flow::DEFAULT_IM_FLOOR;
use super::slit::forward_kernel;
use crate::error::{LabError, Result};

/// Exponents `(r, λ, ξ)` of the forward-flow process `M_t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleExponents {
    pub r: f64,
    pub lambda: f64,
    pub xi: f64,
}

impl MartingaleExponents {
    /// `ln M` from `ln S`, `ln Υ`, `ln Δ`.
    pub fn log_m(&self, log_s: f64, log_upsilon: f64, log_delta: f64) -> f64 {
        -self.r * log_s + (self.xi + self.r) * log_upsilon + (self.lambda + self.r) * log_delta
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ForwardObservables {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub theta: Vec<f64>,
    pub s: Vec<f64>,
    pub upsilon: Vec<f64>,
    pub delta: Vec<f64>,
    pub m: Vec<f64>,
    /// Time at which `Υ` first fell to the stopping level.
    pub stopped_at: Option<f64>,
    /// Set when the point left the domain before the end of the chain.
    pub swallowed: bool,
}

impl ForwardObservables {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, state: &ForwardState, u: f64, exps: &MartingaleExponents) {
        let zeta = Complex64::new(state.g.re - u, state.g.im);
        let delta = state.dg.norm();
        let s = zeta.im / zeta.norm();
        let upsilon = zeta.im / delta;
        self.times.push(t);
        self.x.push(zeta.re);
        self.y.push(zeta.im);
        self.theta.push(zeta.arg());
        self.s.push(s);
        self.upsilon.push(upsilon);
        self.delta.push(delta);
        self.m.push(exps.log_m(s.ln(), upsilon.ln(), delta.ln()).exp());
    }
}

/// `(g_t(z), g_t'(z))` advanced one slit at a time.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ForwardState {
    pub g: Complex64,
    pub dg: Complex64,
}

impl ForwardState {
    pub fn new(z: Complex64) -> Self {
        Self {
            g: z,
            dg: Complex64::new(1.0, 0.0),
        }
    }

    /// Applies the slit map with driving value `v` and `rc = √(2a·dt)`.
    /// Returns false once the point has dropped below the swallowing floor.
    #[inline]
    pub fn step(&mut self, v: f64, rc: f64) -> bool {
        let (w, dw) = forward_kernel(self.g, v, rc);
        self.g = w;
        self.dg *= dw;
        self.g.im >= DEFAULT_IM_FLOOR
    }
}

/// Records the observables of `z` at every step boundary of `chain`.
///
/// With `stop_upsilon` set, recording ends at the first step boundary where
/// `Υ_t ≤ stop_upsilon`.
pub fn forward_observables(
    chain: &SlitMapChain,
    z: HalfPlanePoint,
    exps: MartingaleExponents,
    stop_upsilon: Option<f64>,
) -> Result<ForwardObservables> {
    if let Some(level) = stop_upsilon {
        if !(level > 0.0) {
            return Err(LabError::param("stop_upsilon", "must be positive"));
        }
    }
    let mut out = ForwardObservables::default();
    let mut state = ForwardState::new(z.to_complex());
    out.push(0.0, &state, chain.driving_at(0), &exps);
    let stopped = |out: &ForwardObservables| {
        stop_upsilon.is_some_and(|level| *out.upsilon.last().expect("nonempty") <= level)
    };
    if stopped(&out) {
        out.stopped_at = Some(0.0);
        return Ok(out);
    }
    for (k, (step, &rc)) in chain.steps().iter().zip(chain.root_caps()).enumerate() {
        if !state.step(step.v(), rc) {
            out.swallowed = true;
            break;
        }
        let t = chain.time_at(k + 1);
        out.push(t, &state, chain.driving_at(k + 1), &exps);
        if stopped(&out) {
            out.stopped_at = Some(t);
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driving::sample_brownian;
    use crate::loewner::chain::DrivingStep;
    use crate::loewner::flow::forward_flow;

    const EXPS: MartingaleExponents = MartingaleExponents {
        r: -4.0,
        lambda: 6.0,
        xi: 4.0,
    };

    #[test]
    fn initial_values() {
        let chain = SlitMapChain::new(1.0, vec![DrivingStep::new(0.01, 0.0).unwrap()]).unwrap();
        let z = HalfPlanePoint::new(1.0, 1.0).unwrap();
        let obs = forward_observables(&chain, z, EXPS, None).unwrap();
        assert_eq!(obs.len(), 2);
        assert_eq!(obs.times[0], 0.0);
        assert!((obs.theta[0] - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((obs.s[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(obs.delta[0], 1.0);
        assert_eq!(obs.upsilon[0], 1.0);
        // M_0 = S^{-r}
        assert!((obs.m[0] - 0.5f64.sqrt().powf(4.0)).abs() < 1e-14);
    }

    #[test]
    fn matches_forward_flow_and_invariants() {
        let path = sample_brownian(2.0, 2000, 1e-3, 5).unwrap();
        let chain = SlitMapChain::from_path(&path);
        let z = HalfPlanePoint::new(0.3, 0.7).unwrap();
        let obs = forward_observables(&chain, z, EXPS, None).unwrap();
        let end = forward_flow(&chain, z);
        if end.survived {
            let k = obs.len() - 1;
            let zeta = end.value - chain.driving_at(chain.len());
            assert!((obs.x[k] - zeta.re).abs() < 1e-12);
            assert!((obs.delta[k] - end.deriv.norm()).abs() < 1e-12 * obs.delta[k]);
        }
        for k in 0..obs.len() {
            assert!(obs.theta[k] > 0.0 && obs.theta[k] < std::f64::consts::PI);
            if k > 0 {
                assert!(obs.upsilon[k] <= obs.upsilon[k - 1]);
            }
        }
    }

    #[test]
    fn stops_at_upsilon_level() {
        let path = sample_brownian(2.0, 4000, 1e-3, 6).unwrap();
        let chain = SlitMapChain::from_path(&path);
        let z = HalfPlanePoint::new(0.0, 0.5).unwrap();
        let level = 0.2;
        let obs = forward_observables(&chain, z, EXPS, Some(level)).unwrap();
        let t = obs.stopped_at.expect("Υ decays below 0.2 by t = 4");
        assert_eq!(*obs.times.last().unwrap(), t);
        assert!(*obs.upsilon.last().unwrap() <= level);
        assert!(obs.upsilon[..obs.len() - 1].iter().all(|&u| u > level));
    }
}
