//! Compositions of slit maps: `g_t`, `f_t = g_t⁻¹`, `f̂_t(z) = f_t(z + V_t)` and
//! the reverse flow `h_{t,T}` of a driving path.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chain::{HalfPlanePoint, SlitMapChain};
use super::slit::{forward_kernel, reverse_kernel};
use crate::driving::DrivingPath;
use crate::error::{LabError, Result};

/// Points whose image falls below this height are treated as swallowed.
pub const DEFAULT_IM_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub value: Complex64,
    pub deriv: Complex64,
    pub survived: bool,
    /// Start time of the step during which the point was swallowed.
    pub exit_time: Option<f64>,
}

impl FlowResult {
    fn alive(value: Complex64, deriv: Complex64) -> Self {
        Self {
            value,
            deriv,
            survived: true,
            exit_time: None,
        }
    }
}

/// `g_t(z)` and `g_t'(z)` over the whole chain.
pub fn forward_flow(chain: &SlitMapChain, z: HalfPlanePoint) -> FlowResult {
    forward_flow_with(chain, z.to_complex(), chain.len(), DEFAULT_IM_FLOOR)
}

/// `g_t(z)` after the first `t_steps` steps with a custom swallowing floor.
///
/// `t_steps` is clamped to the chain length.
pub fn forward_flow_with(
    chain: &SlitMapChain,
    z: Complex64,
    t_steps: usize,
    im_floor: f64,
) -> FlowResult {
    let n = t_steps.min(chain.len());
    let mut g = z;
    let mut dg = Complex64::new(1.0, 0.0);
    for (k, (step, &rc)) in chain.steps()[..n]
        .iter()
        .zip(chain.root_caps())
        .enumerate()
    {
        let (w, dw) = forward_kernel(g, step.v(), rc);
        g = w;
        dg *= dw;
        if !(g.im >= im_floor) {
            return FlowResult {
                value: g,
                deriv: dg,
                survived: false,
                exit_time: Some(chain.time_at(k)),
            };
        }
    }
    FlowResult::alive(g, dg)
}

/// Inverse of the first `t_steps` maps applied to `w`: per-step inverses in
/// reverse step order, with the derivative accumulated as a product.
fn inverse_prefix(chain: &SlitMapChain, w: Complex64, t_steps: usize) -> FlowResult {
    let mut h = w;
    let mut dh = Complex64::new(1.0, 0.0);
    let steps = &chain.steps()[..t_steps];
    let caps = &chain.root_caps()[..t_steps];
    for (step, &rc) in steps.iter().zip(caps).rev() {
        let (next, d) = reverse_kernel(h, step.v(), rc);
        h = next;
        dh *= d;
    }
    FlowResult::alive(h, dh)
}

/// `f_t(w) = g_t⁻¹(w)` at the end of the chain.
pub fn inverse_map(chain: &SlitMapChain, w: HalfPlanePoint) -> FlowResult {
    inverse_prefix(chain, w.to_complex(), chain.len())
}

/// `f̂_t(z) = f_t(z + V_t)` where `t` is the time after `t_steps` steps.
pub fn shifted_inverse(chain: &SlitMapChain, z: Complex64, t_steps: usize) -> Result<FlowResult> {
    chain.check_steps(t_steps)?;
    if !(z.im > 0.0) {
        return Err(LabError::param("z", format!("imaginary part must be > 0, got {}", z.im)));
    }
    let shift = chain.driving_at(t_steps);
    Ok(inverse_prefix(
        chain,
        Complex64::new(z.re + shift, z.im),
        t_steps,
    ))
}

/// `|f̂_t'(iy)|` using the first `t_steps` steps.
pub fn shifted_inverse_deriv(chain: &SlitMapChain, y: f64, t_steps: usize) -> Result<f64> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(LabError::param("y", format!("must be positive, got {y}")));
    }
    Ok(shifted_inverse(chain, Complex64::new(0.0, y), t_steps)?.deriv.norm())
}

/// Reverse flow `h_{T,T}(z)` driven by `U_{t,T} = V_{T-t} - V_T`.
///
/// The path is read as a chain (right-endpoint holds), so reverse step `j`
/// holds `U = V_{T - j·dt} - V_T`. At the discrete level the result equals
/// `f̂_T(z) - V_T`.
pub fn reverse_flow_tip(path: &DrivingPath, t_end: f64, z: HalfPlanePoint) -> Result<FlowResult> {
    let m = path.step_index(t_end)?;
    let values = path.values();
    let vt = values[m];
    let rc = (2.0 * path.capacity_speed() * path.dt()).sqrt();
    let mut h = z.to_complex();
    let mut dh = Complex64::new(1.0, 0.0);
    for j in 0..m {
        let u = values[m - j] - vt;
        let (next, d) = reverse_kernel(h, u, rc);
        h = next;
        dh *= d;
    }
    Ok(FlowResult::alive(h, dh))
}
