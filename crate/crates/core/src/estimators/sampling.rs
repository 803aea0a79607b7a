//! Point flows driven by freshly sampled Brownian increments with adaptive steps.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::loewner::{forward_kernel, reverse_kernel, DEFAULT_IM_FLOOR};

/// Driving law used by sampled flows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DrivingModel {
    #[default]
    Brownian,
    Constant,
}

/// Step size `dt = clamp(rel·|Z|², dt_min, dt_max)`.
///
/// Near the driving point the flow varies on the scale `|Z|²`, so `rel`
/// bounds the per-step discretisation error uniformly in scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepPolicy {
    pub rel: f64,
    pub dt_max: f64,
    pub dt_min: f64,
}

impl StepPolicy {
    pub const DEFAULT_REL: f64 = 0.01;

    pub fn new(rel: f64, dt_max: f64) -> Self {
        Self {
            rel,
            dt_max,
            dt_min: dt_max * 1e-12,
        }
    }

    #[inline]
    fn dt(&self, z: Complex64) -> f64 {
        (self.rel * z.norm_sqr()).clamp(self.dt_min, self.dt_max)
    }
}

fn increment<R: Rng>(model: DrivingModel, dt: f64, rng: &mut R) -> f64 {
    match model {
        DrivingModel::Brownian => dt.sqrt() * rng.sample::<f64, _>(StandardNormal),
        DrivingModel::Constant => 0.0,
    }
}

/// Reverse flow `h_t(z)` seen from the driving point: `Z_t = h_t(z) - U_t`.
#[derive(Clone, Copy, Debug)]
pub struct ReverseWalker {
    pub z: Complex64,
    pub log_deriv: f64,
    pub t: f64,
    pub steps: u64,
    a: f64,
}

impl ReverseWalker {
    pub fn new(z0: Complex64, a: f64) -> Self {
        Self {
            z: z0,
            log_deriv: 0.0,
            t: 0.0,
            steps: 0,
            a,
        }
    }

    /// Runs the flow up to time `t_end`; the last step is shortened to land on it.
    pub fn advance_to<R: Rng>(
        &mut self,
        t_end: f64,
        policy: &StepPolicy,
        model: DrivingModel,
        rng: &mut R,
    ) {
        while self.t < t_end {
            let mut dt = policy.dt(self.z);
            let last = self.t + dt >= t_end * (1.0 - 1e-14);
            if last {
                dt = t_end - self.t;
            }
            let du = increment(model, dt, rng);
            let (w, d) = reverse_kernel(self.z, du, (2.0 * self.a * dt).sqrt());
            self.z = Complex64::new(w.re - du, w.im);
            self.log_deriv += d.norm().ln();
            self.steps += 1;
            self.t = if last { t_end } else { self.t + dt };
        }
    }
}

/// Forward flow `g_t(z)` seen from the driving point: `Z_t = g_t(z) - U_t`.
#[derive(Clone, Copy, Debug)]
pub struct ForwardWalker {
    pub z: Complex64,
    pub log_deriv: f64,
    pub t: f64,
    pub alive: bool,
    a: f64,
}

impl ForwardWalker {
    pub fn new(z0: Complex64, a: f64) -> Self {
        Self {
            z: z0,
            log_deriv: 0.0,
            t: 0.0,
            alive: true,
            a,
        }
    }

    /// One adaptive step, never past `t_end`.
    pub fn step<R: Rng>(&mut self, t_end: f64, policy: &StepPolicy, rng: &mut R) {
        let mut dt = policy.dt(self.z);
        let last = self.t + dt >= t_end * (1.0 - 1e-14);
        if last {
            dt = t_end - self.t;
        }
        let du = increment(DrivingModel::Brownian, dt, rng);
        let (w, d) = forward_kernel(self.z, du, (2.0 * self.a * dt).sqrt());
        self.z = Complex64::new(w.re - du, w.im);
        self.log_deriv += d.norm().ln();
        self.t = if last { t_end } else { self.t + dt };
        if !(self.z.im >= DEFAULT_IM_FLOOR) {
            self.alive = false;
        }
    }
}
