//! Driving functions.
//!
//! Paths use the normalisation `∂_t g_t = a / (g_t - V_t)` with `a = 2/κ` and
//! `V` a standard Brownian motion. Paths written in the other common
//! normalisation (`a = 2`, `W = √κ·B`) are converted by
//! [`DrivingPath::from_common_convention`]: the two chains agree after the
//! spatial rescaling `G_t(z) = √κ·g_t(z/√κ)`, so `V = W/√κ` at equal times.

mod io;

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub use io::PathHeader;

/// Identifier of the Brownian generator: ChaCha8 streams, ziggurat normals.
pub const BROWNIAN_GENERATOR: &str = "brownian:chacha8";

/// Independent random stream `stream` derived from `master_seed`.
///
/// Streams are ChaCha8 counters keyed by the seed, so per-sample generators
/// need no coordination between workers.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivingPath {
    dt: f64,
    values: Vec<f64>,
    kappa: f64,
    seed: u64,
    generator_id: String,
}

/// Deterministic test drivers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DriverKind {
    /// `V ≡ 0`: the vertical slit.
    Constant,
    Linear { slope: f64 },
    /// `V_t = amplitude · sin(2π·frequency·t)`.
    Sine { amplitude: f64, frequency: f64 },
}

impl DriverKind {
    fn id(&self) -> &'static str {
        match self {
            DriverKind::Constant => "constant",
            DriverKind::Linear { .. } => "linear",
            DriverKind::Sine { .. } => "sine",
        }
    }

    fn value(&self, t: f64) -> f64 {
        match *self {
            DriverKind::Constant => 0.0,
            DriverKind::Linear { slope } => slope * t,
            DriverKind::Sine {
                amplitude,
                frequency,
            } => amplitude * (2.0 * std::f64::consts::PI * frequency * t).sin(),
        }
    }
}

/// Δ(t, s) = sup over `0 ≤ r ≤ s²` of `√(s⁻²(V_{t+r} - V_t)² + 4)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityStat {
    pub t: f64,
    pub s: f64,
    pub delta: f64,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(LabError::param("kappa", format!("must be positive, got {kappa}")));
    }
    Ok(())
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(LabError::param("dt", format!("must be positive, got {dt}")));
    }
    Ok(())
}

impl DrivingPath {
    pub fn new(
        kappa: f64,
        dt: f64,
        values: Vec<f64>,
        seed: u64,
        generator_id: impl Into<String>,
    ) -> Result<Self> {
        check_kappa(kappa)?;
        check_dt(dt)?;
        if values.len() < 2 {
            return Err(LabError::param("values", "a path needs at least two values"));
        }
        if values[0] != 0.0 {
            return Err(LabError::param("values", "paths start at V_0 = 0"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::param("values", "non-finite path value"));
        }
        Ok(Self {
            dt,
            values,
            kappa,
            seed,
            generator_id: generator_id.into(),
        })
    }

    /// Converts a path given in the `a = 2`, `W = √κ·B` normalisation.
    pub fn from_common_convention(
        kappa: f64,
        dt: f64,
        common_values: &[f64],
        seed: u64,
        generator_id: impl Into<String>,
    ) -> Result<Self> {
        check_kappa(kappa)?;
        let scale = kappa.sqrt().recip();
        let values = common_values.iter().map(|w| w * scale).collect();
        Self::new(kappa, dt, values, seed, generator_id)
    }

    /// Values in the `a = 2`, `W = √κ·B` normalisation.
    pub fn to_common_convention(&self) -> Vec<f64> {
        let scale = self.kappa.sqrt();
        self.values.iter().map(|v| v * scale).collect()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `a = 2/κ`.
    pub fn capacity_speed(&self) -> f64 {
        2.0 / self.kappa
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generator_id(&self) -> &str {
        &self.generator_id
    }

    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn total_time(&self) -> f64 {
        self.n_steps() as f64 * self.dt
    }

    pub fn time_at(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn is_brownian(&self) -> bool {
        self.generator_id.starts_with(BROWNIAN_GENERATOR)
    }

    /// Grid index of time `t`; `t` must sit on the grid to 1e-9 relative.
    pub fn step_index(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0) {
            return Err(LabError::Range(format!("time {t} is negative")));
        }
        let k = (t / self.dt).round();
        if (k * self.dt - t).abs() > 1e-9 * t.max(self.dt) {
            return Err(LabError::Range(format!(
                "time {t} is not on the grid of step {}",
                self.dt
            )));
        }
        let k = k as usize;
        if k > self.n_steps() {
            return Err(LabError::Range(format!(
                "time {t} beyond path end {}",
                self.total_time()
            )));
        }
        Ok(k)
    }

    fn refinements(&self) -> u32 {
        self.generator_id
            .rsplit_once("/bridge=")
            .and_then(|(_, n)| n.parse().ok())
            .unwrap_or(0)
    }
}

/// Brownian driving path with `n_steps` increments of variance `dt`.
pub fn sample_brownian(kappa: f64, n_steps: usize, dt: f64, seed: u64) -> Result<DrivingPath> {
    check_kappa(kappa)?;
    check_dt(dt)?;
    if n_steps == 0 {
        return Err(LabError::param("n_steps", "must be at least 1"));
    }
    let mut rng = stream_rng(seed, 0);
    let sd = dt.sqrt();
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut v = 0.0;
    values.push(v);
    for _ in 0..n_steps {
        let g: f64 = StandardNormal.sample(&mut rng);
        v += sd * g;
        values.push(v);
    }
    DrivingPath::new(kappa, dt, values, seed, BROWNIAN_GENERATOR)
}

/// Brownian-bridge midpoint refinement, `levels` halvings of the step.
///
/// Existing values are kept bit-for-bit; each inserted midpoint is drawn from
/// the bridge law `N((v_k + v_{k+1})/2, dt/4)`.
pub fn refine_dyadic(path: &DrivingPath, levels: u32) -> Result<DrivingPath> {
    if levels == 0 {
        return Ok(path.clone());
    }
    if !path.is_brownian() {
        return Err(LabError::param(
            "path",
            format!(
                "bridge refinement needs a Brownian path, got generator `{}`",
                path.generator_id
            ),
        ));
    }
    let done = path.refinements();
    let mut values = path.values.clone();
    let mut dt = path.dt;
    for level in 0..levels {
        let mut rng = stream_rng(path.seed, 1 + u64::from(done + level));
        let sd = (dt / 4.0).sqrt();
        let mut next = Vec::with_capacity(2 * values.len() - 1);
        for w in values.windows(2) {
            let g: f64 = StandardNormal.sample(&mut rng);
            next.push(w[0]);
            next.push(0.5 * (w[0] + w[1]) + sd * g);
        }
        next.push(*values.last().expect("path has values"));
        values = next;
        dt /= 2.0;
    }
    DrivingPath::new(
        path.kappa,
        dt,
        values,
        path.seed,
        format!("{BROWNIAN_GENERATOR}/bridge={}", done + levels),
    )
}

/// Δ(t, s) over the grid points of `[t, t + s²]`.
pub fn modulus_delta(path: &DrivingPath, t: f64, s: f64) -> Result<ContinuityStat> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(LabError::param("s", format!("must be positive, got {s}")));
    }
    let start = path.step_index(t)?;
    let end_time = t + s * s;
    if end_time > path.total_time() * (1.0 + 1e-12) {
        return Err(LabError::Range(format!(
            "window [{t}, {end_time}] leaves the path range [0, {}]",
            path.total_time()
        )));
    }
    let end = (((end_time / path.dt) * (1.0 + 1e-12)).floor() as usize).min(path.n_steps());
    let v0 = path.values[start];
    let max_dev = path.values[start..=end]
        .iter()
        .map(|v| (v - v0).abs())
        .fold(0.0, f64::max);
    let delta = ((max_dev / s).powi(2) + 4.0).sqrt();
    Ok(ContinuityStat { t, s, delta })
}

/// Δ(t, s) for every grid time `t` whose window `[t, t + s²]` fits in the
/// path, computed with sliding-window extrema in linear time.
pub fn modulus_profile(path: &DrivingPath, s: f64) -> Result<Vec<ContinuityStat>> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(LabError::param("s", format!("must be positive, got {s}")));
    }
    let window = ((s * s) / path.dt * (1.0 + 1e-12)).floor() as usize;
    let n = path.n_steps();
    if (s * s) > path.total_time() * (1.0 + 1e-12) {
        return Err(LabError::Range(format!("s = {s} exceeds the path length")));
    }
    let v = &path.values;
    let mut hi: VecDeque<usize> = VecDeque::new();
    let mut lo: VecDeque<usize> = VecDeque::new();
    let mut out = Vec::with_capacity(n + 1 - window);
    // windows [k, k + window] for k = last..=0, scanned right to left
    let mut next = n + 1;
    for k in (0..=(n - window)).rev() {
        while next > k {
            next -= 1;
            while hi.back().is_some_and(|&j| v[j] <= v[next]) {
                hi.pop_back();
            }
            hi.push_back(next);
            while lo.back().is_some_and(|&j| v[j] >= v[next]) {
                lo.pop_back();
            }
            lo.push_back(next);
        }
        while hi.front().is_some_and(|&j| j > k + window) {
            hi.pop_front();
        }
        while lo.front().is_some_and(|&j| j > k + window) {
            lo.pop_front();
        }
        let dev = (v[hi[0]] - v[k]).max(v[k] - v[lo[0]]);
        out.push(ContinuityStat {
            t: path.time_at(k),
            s,
            delta: ((dev / s).powi(2) + 4.0).sqrt(),
        });
    }
    out.reverse();
    Ok(out)
}

/// Largest Δ(t, s) over grid times `t` with the window inside the path.
pub fn max_modulus_delta(path: &DrivingPath, s: f64) -> Result<ContinuityStat> {
    let profile = modulus_profile(path, s)?;
    Ok(profile
        .into_iter()
        .fold(None::<ContinuityStat>, |best, c| match best {
            Some(b) if b.delta >= c.delta => Some(b),
            _ => Some(c),
        })
        .expect("profile is nonempty"))
}

/// Deterministic fixture path with `V_0 = 0` sampled on a uniform grid.
pub fn deterministic_driver(
    kind: DriverKind,
    kappa: f64,
    n_steps: usize,
    dt: f64,
) -> Result<DrivingPath> {
    check_kappa(kappa)?;
    check_dt(dt)?;
    if n_steps == 0 {
        return Err(LabError::param("n_steps", "must be at least 1"));
    }
    let values = (0..=n_steps).map(|k| kind.value(k as f64 * dt)).collect();
    DrivingPath::new(kappa, dt, values, 0, kind.id())
}
