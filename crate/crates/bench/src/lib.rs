//! Fixtures shared by the criterion benches.

use loewner_lab::driving::sample_brownian;
use loewner_lab::{HalfPlanePoint, SlitMapChain};

/// Brownian chain with `n` steps on `[0, 1]`.
pub fn brownian_chain(kappa: f64, n: usize, seed: u64) -> SlitMapChain {
    let path = sample_brownian(kappa, n, 1.0 / n as f64, seed).expect("valid parameters");
    SlitMapChain::from_path(&path)
}

/// A fixed interior starting point.
pub fn probe_point() -> HalfPlanePoint {
    HalfPlanePoint::new(0.25, 0.5).expect("upper half-plane")
}
