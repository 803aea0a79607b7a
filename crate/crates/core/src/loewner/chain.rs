use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::driving::DrivingPath;
use crate::error::{LabError, Result};

/// A point of the open upper half plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint {
    re: f64,
    im: f64,
}

impl HalfPlanePoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(LabError::param("z", "coordinates must be finite"));
        }
        if im <= 0.0 {
            return Err(LabError::param("z", format!("imaginary part must be > 0, got {im}")));
        }
        Ok(Self { re, im })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<HalfPlanePoint> for Complex64 {
    fn from(p: HalfPlanePoint) -> Self {
        p.to_complex()
    }
}

/// One capacity-time increment with the driving value held constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivingStep {
    dt: f64,
    v: f64,
}

impl DrivingStep {
    pub fn new(dt: f64, v: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(LabError::param("dt", format!("must be positive and finite, got {dt}")));
        }
        if !v.is_finite() {
            return Err(LabError::param("v", "driving value must be finite"));
        }
        Ok(Self { dt, v })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn v(&self) -> f64 {
        self.v
    }
}

/// A discretised Loewner chain: a sequence of vertical-slit maps.
///
/// Step `k` holds the driving value `v_k` on `[t_k, t_{k+1})`. When built from
/// a [`DrivingPath`] the held value is the path value at the right end of the
/// step, so the driving value "at time `t_k`" is `v_{k-1}` (or the start value
/// for `k = 0`) and the trace at `t_k` sits above it.
#[derive(Clone, Debug, PartialEq)]
pub struct SlitMapChain {
    a: f64,
    start: f64,
    steps: Vec<DrivingStep>,
    times: Vec<f64>,
    root_caps: Vec<f64>,
}

impl SlitMapChain {
    pub fn new(a: f64, steps: Vec<DrivingStep>) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(LabError::param("a", format!("capacity speed must be > 0, got {a}")));
        }
        if steps.is_empty() {
            return Err(LabError::param("steps", "chain needs at least one step"));
        }
        let mut times = Vec::with_capacity(steps.len() + 1);
        let mut acc = 0.0;
        let mut comp = 0.0;
        times.push(0.0);
        for s in &steps {
            // Kahan summation keeps total_time within 1e-12 of the exact sum
            let y = s.dt - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            times.push(acc);
        }
        let root_caps = steps.iter().map(|s| (2.0 * a * s.dt).sqrt()).collect();
        Ok(Self {
            a,
            start: 0.0,
            steps,
            times,
            root_caps,
        })
    }

    /// Uniform steps of length `dt` holding `values[1..]`; `values[0]` is the
    /// start value.
    pub fn from_values(a: f64, dt: f64, values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(LabError::param("values", "need at least two path values"));
        }
        let steps = values[1..]
            .iter()
            .map(|&v| DrivingStep::new(dt, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(a, steps)?.with_start(values[0]))
    }

    /// Chain of a driving path with `a = 2/κ`.
    pub fn from_path(path: &DrivingPath) -> Self {
        Self::from_values(path.capacity_speed(), path.dt(), path.values())
            .expect("driving paths are validated on construction")
    }

    pub fn with_start(mut self, v0: f64) -> Self {
        self.start = v0;
        self
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn steps(&self) -> &[DrivingStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total_time(&self) -> f64 {
        self.times[self.steps.len()]
    }

    /// Capacity time after `k` steps.
    pub fn time_at(&self, k: usize) -> f64 {
        self.times[k]
    }

    /// Driving value at time `t_k`.
    pub fn driving_at(&self, k: usize) -> f64 {
        if k == 0 {
            self.start
        } else {
            self.steps[k - 1].v
        }
    }

    pub fn start_value(&self) -> f64 {
        self.start
    }

    /// `√(2a·dt_k)` for every step.
    pub(crate) fn root_caps(&self) -> &[f64] {
        &self.root_caps
    }

    /// Chain made of the first `k` steps, or `None` for `k = 0`.
    pub fn truncated(&self, k: usize) -> Option<Self> {
        if k == 0 || k > self.len() {
            return None;
        }
        Some(
            Self::new(self.a, self.steps[..k].to_vec())
                .expect("prefix of a valid chain")
                .with_start(self.start),
        )
    }

    pub(crate) fn check_steps(&self, t_steps: usize) -> Result<()> {
        if t_steps > self.len() {
            return Err(LabError::Range(format!(
                "t_steps = {t_steps} exceeds chain length {}",
                self.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_time_is_sum_of_steps() {
        let steps: Vec<_> = (0..10_000)
            .map(|k| DrivingStep::new(1e-4 * (1.0 + (k % 7) as f64), 0.0).unwrap())
            .collect();
        let exact: f64 = (0..10_000).map(|k| 1e-4 * (1.0 + (k % 7) as f64)).sum();
        let chain = SlitMapChain::new(1.0, steps).unwrap();
        assert!((chain.total_time() - exact).abs() <= 1e-12 * exact);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(HalfPlanePoint::new(0.0, 0.0).is_err());
        assert!(HalfPlanePoint::new(0.0, -1.0).is_err());
        assert!(DrivingStep::new(0.0, 1.0).is_err());
        assert!(DrivingStep::new(0.1, f64::NAN).is_err());
        assert!(SlitMapChain::new(1.0, vec![]).is_err());
        assert!(SlitMapChain::new(0.0, vec![DrivingStep::new(0.1, 0.0).unwrap()]).is_err());
    }

    #[test]
    fn driving_at_follows_right_endpoint_convention() {
        let chain = SlitMapChain::from_values(1.0, 0.25, &[0.0, 0.25, 0.5, 0.75]).unwrap();
        assert_eq!(chain.len(), 3);
        assert_eq!(chain.driving_at(0), 0.0);
        assert_eq!(chain.driving_at(2), 0.5);
        assert_eq!(chain.time_at(3), 0.75);
    }
}
