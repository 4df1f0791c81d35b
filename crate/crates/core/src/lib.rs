//! Classical two-particle bound system scattering off a Gaussian well.
//!
//! A pair of unit masses held together by a spring and a short-range
//! repulsion is fired at an attractive well. Depending on the incoming
//! speed it passes through, bounces back, or gets stuck oscillating inside,
//! and the outcome depends chaotically on the speed.
//!
//! * [`model`]: parameters, forces, energy, center-of-mass coordinates.
//! * [`integrator`]: velocity Verlet and RK4 with declarative stop conditions.
//! * [`linearized`]: small-oscillation closed forms inside the well.
//! * [`scattering`]: a single launch and its classification.
//! * [`sweep`]: parallel deterministic velocity sweeps and boundary zooming.
//! * [`sensitivity`]: divergence of nearby trajectories.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod integrator;
pub mod linearized;
pub mod model;
pub mod scattering;
pub mod sensitivity;
pub mod sweep;

pub use error::{Error, Result};
pub use integrator::{
    integrate, integrate_observed, step, Diagnostics, IntegratorConfig, Scheme, StopCondition,
    StopReason,
};
pub use model::{CmState, Dynamics, ModelParams, State};
pub use scattering::{run_scattering, Outcome, OutcomeRecord, Scenario};
