//! Numerical laboratory for chordal Loewner evolution and SLE_κ.
//!
//! The crate is organised in four layers:
//!
//! - [`loewner`]: exact vertical-slit maps and their compositions (forward
//!   flow `g_t`, inverse `f_t`, shifted inverse `f̂_t`, reverse flow `h_t`),
//!   tip profiles, traces and forward-flow observables.
//! - [`driving`]: driving functions. Brownian paths in the `a = 2/κ`,
//!   standard-Brownian normalisation, deterministic fixtures, Brownian-bridge
//!   refinement and the modulus-of-continuity statistic Δ(t, s).
//! - [`spectra`]: closed-form exponent algebra (ρ(β), d̂_β, d_β, F_tip, the
//!   r/λ/ζ/β/ρ/q parametrisation and the forward-flow exponents).
//! - [`estimators`]: seeded, order-independent Monte-Carlo estimators with
//!   jackknife error bars.
//!
//! [`invariants`] bundles the deterministic checks used by `loewner-lab check`.

pub mod driving;
pub mod error;
pub mod estimators;
pub mod invariants;
pub mod loewner;
pub mod report;
pub mod spectra;

pub use error::{LabError, Result};
pub use num_complex::Complex64;

pub use driving::{DrivingPath, DriverKind};
pub use loewner::{DrivingStep, FlowResult, HalfPlanePoint, SlitMapChain, TipProfile};
pub use spectra::{ExponentPoint, ForwardExponents, SpectrumParams};
