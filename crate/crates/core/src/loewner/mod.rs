//! Chordal Loewner maps built from exact vertical-slit steps.

mod chain;
mod flow;
mod observables;
mod profile;
mod slit;

pub use chain::{DrivingStep, HalfPlanePoint, SlitMapChain};
pub use flow::{
    forward_flow, forward_flow_with, inverse_map, reverse_flow_tip, shifted_inverse,
    shifted_inverse_deriv, FlowResult, DEFAULT_IM_FLOOR,
};
pub use observables::{forward_observables, ForwardObservables, MartingaleExponents};
pub use profile::{
    default_trace_height, dyadic_sum, tip_profile, trace, trace_point, trace_point_with_bound,
    TipProfile,
};
pub use slit::{slit_forward, slit_forward_deriv, slit_reverse, slit_reverse_deriv};

pub(crate) use slit::{forward_kernel, reverse_kernel};
