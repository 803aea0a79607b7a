//! Seeded Monte-Carlo estimators.
//!
//! Every estimator is a pure function of its parameters and master seed:
//! sample `i` draws from its own ChaCha8 stream, samples are collected in
//! index order and means use compensated summation, so results do not depend
//! on the number of worker threads.

mod counts;
mod harmonic;
mod martingale;
mod moments;
mod radial;
mod sampling;
pub mod stats;

pub use counts::{
    estimate_count_scaling, estimate_count_scaling_multi, CountConfig, CountDirection,
    CountScaling, CountStatistic, DEFAULT_MAX_N, FINE_PER_CELL,
};
pub use harmonic::{estimate_tip_harmonic_measure, HarmonicMeasureEstimate, MIN_ARC_SAMPLES};
pub use martingale::{forward_martingale_test, reverse_martingale_test, FlatnessReport};
pub use moments::{
    beta_histogram, estimate_moment, estimate_moment_with, BetaHistogram, HistogramBin,
    MomentEstimate, HISTOGRAM_RANGE, MIN_MOMENT_SAMPLES, MOMENT_DT_FRACTION,
};
pub use radial::{radial_theta_simulate, DensityBin, RadialReport, RADIAL_BINS, RADIAL_DT};
pub use sampling::{DrivingModel, ForwardWalker, ReverseWalker, StepPolicy};

pub use crate::loewner::{forward_observables, ForwardObservables};

use rand_chacha::ChaCha8Rng;

use crate::driving::stream_rng;
use crate::error::{LabError, Result};

/// Stream for sample `i` of block `j`.
pub(crate) fn sample_stream(master_seed: u64, block: usize, sample: usize) -> ChaCha8Rng {
    stream_rng(master_seed, ((block as u64) << 32) | sample as u64)
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(LabError::param("kappa", format!("must be positive and finite, got {kappa}")));
    }
    Ok(())
}

pub(crate) fn check_samples(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(LabError::param("samples", format!("need at least {min}, got {n}")));
    }
    Ok(())
}
