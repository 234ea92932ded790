//! Modeling and control of a 3-DoF spherical articulated manipulator.
//!
//! The crate is `no_std` (with `alloc`) so the numerical core can be reused
//! on targets without an operating system. File formats, configuration and
//! the command-line front end live in the `armlqr` crate.
//!
//! Module map:
//!
//! - [`model`]: physical parameters and the joint-space state.
//! - [`kinematics`]: DH transform chain, forward and closed-form inverse kinematics.
//! - [`dynamics`]: inertia, velocity-coupling and gravity terms; forward and inverse dynamics.
//! - [`linearize`]: state-space model about a static operating point.
//! - [`control`]: Riccati solver, LQR gain and control law, PID baseline, quadratic cost.
//! - [`sim`]: fixed-step RK4 closed-loop simulation and step-response metrics.
#![no_std]
// `!(x < limit)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod control;
pub mod dynamics;
pub mod kinematics;
pub mod linearize;
pub mod model;
pub mod sim;

mod error;

pub use error::{Error, Result};
pub use model::{default_params, validate_params, JointState, ManipulatorParams, TorqueCommand};
