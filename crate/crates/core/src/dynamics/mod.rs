//! Joint-space dynamics `τ = M(θ)·θ̈ + V(θ, θ̇) + G(θ)`.
//!
//! Two inertia/velocity models share one gravity vector:
//!
//! - [`PlantModel::Paper`]: the published closed-form terms, verbatim ([`paper`]).
//! - [`PlantModel::SlenderRod`]: the self-consistent slender-rod terms
//!   ([`slender_rod`]), the default plant for linearization and simulation.
//!
//! [`energy`] rebuilds all three terms numerically from link energies and is
//! used to cross-check both.

#[cfg(not(feature = "std"))]
use nalgebra::ComplexField;
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::{Error, JointState, ManipulatorParams, Result, TorqueCommand};

pub mod energy;
pub mod paper;
pub mod slender_rod;

pub use paper::{gravity_vector, inertia_matrix, velocity_vector};

/// Inertia matrices with a condition number at or above this are rejected.
pub const SINGULAR_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlantModel {
    /// Published closed-form terms, coefficient for coefficient.
    Paper,
    /// Consistent slender-rod terms; positive-definite inertia.
    #[default]
    SlenderRod,
}

impl PlantModel {
    pub fn name(self) -> &'static str {
        match self {
            PlantModel::Paper => "paper",
            PlantModel::SlenderRod => "slender-rod",
        }
    }

    pub fn inertia(self, p: &ManipulatorParams, theta: &Vector3<f64>) -> Matrix3<f64> {
        match self {
            PlantModel::Paper => paper::inertia_matrix(p, theta),
            PlantModel::SlenderRod => slender_rod::inertia_matrix(p, theta),
        }
    }

    pub fn velocity(self, p: &ManipulatorParams, theta: &Vector3<f64>, omega: &Vector3<f64>) -> Vector3<f64> {
        match self {
            PlantModel::Paper => paper::velocity_vector(p, theta, omega),
            PlantModel::SlenderRod => slender_rod::velocity_vector(p, theta, omega),
        }
    }

    pub fn gravity(self, p: &ManipulatorParams, theta: &Vector3<f64>) -> Vector3<f64> {
        paper::gravity_vector(p, theta)
    }

    pub fn terms(self, p: &ManipulatorParams, state: &JointState) -> DynamicsTerms {
        DynamicsTerms {
            inertia: self.inertia(p, &state.theta),
            velocity: self.velocity(p, &state.theta, &state.omega),
            gravity: self.gravity(p, &state.theta),
        }
    }
}

/// `M`, `V` and `G` evaluated at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsTerms {
    pub inertia: Matrix3<f64>,
    pub velocity: Vector3<f64>,
    pub gravity: Vector3<f64>,
}

impl DynamicsTerms {
    /// `M⁻¹·rhs`, using the zero coupling between the base joint and the
    /// two elbow-plane joints.
    pub fn solve_inertia(&self, rhs: &Vector3<f64>) -> Result<Vector3<f64>> {
        solve_block_inertia(&self.inertia, rhs)
    }
}

/// Solves `M·x = rhs` for `M = diag(m11, [[m22, m23], [m23, m33]])`.
pub fn solve_block_inertia(m: &Matrix3<f64>, rhs: &Vector3<f64>) -> Result<Vector3<f64>> {
    let condition = inertia_condition(m);
    if !(condition < SINGULAR_CONDITION) {
        return Err(Error::SingularInertia { condition });
    }
    let lower = m.fixed_view::<2, 2>(1, 1).into_owned();
    let det = lower[(0, 0)] * lower[(1, 1)] - lower[(0, 1)] * lower[(1, 0)];
    let inv = Matrix2::new(lower[(1, 1)], -lower[(0, 1)], -lower[(1, 0)], lower[(0, 0)]) / det;
    let tail = inv * Vector2::new(rhs[1], rhs[2]);
    Ok(Vector3::new(rhs[0] / m[(0, 0)], tail[0], tail[1]))
}

/// `M⁻¹` for the block structure above.
pub fn inverse_inertia(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let mut inv = Matrix3::zeros();
    for j in 0..3 {
        let col = solve_block_inertia(m, &Vector3::ith(j, 1.0))?;
        inv.set_column(j, &col);
    }
    Ok(inv)
}

/// Ratio of the largest to smallest eigenvalue magnitude of the block-
/// structured symmetric inertia matrix. Infinite when an eigenvalue is zero.
pub fn inertia_condition(m: &Matrix3<f64>) -> f64 {
    let eig = inertia_eigenvalues(m);
    let mags = eig.map(|e| e.abs());
    let lo = mags.min();
    let hi = mags.max();
    if lo == 0.0 || !lo.is_finite() || !hi.is_finite() {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Eigenvalues of the block-structured symmetric inertia matrix, in the
/// order `(m11, λ_low, λ_high)` where the last two belong to the 2×2 block.
pub fn inertia_eigenvalues(m: &Matrix3<f64>) -> Vector3<f64> {
    let (a, b, d) = (m[(1, 1)], m[(1, 2)], m[(2, 2)]);
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    Vector3::new(m[(0, 0)], mean - radius, mean + radius)
}

/// `τ = M·θ̈ + V + G`.
pub fn inverse_dynamics(
    model: PlantModel,
    p: &ManipulatorParams,
    state: &JointState,
    accel: &Vector3<f64>,
) -> TorqueCommand {
    let t = model.terms(p, state);
    TorqueCommand::new(t.inertia * accel + t.velocity + t.gravity)
}

/// `θ̈ = M⁻¹·(τ − V − G)`.
pub fn forward_dynamics(
    model: PlantModel,
    p: &ManipulatorParams,
    state: &JointState,
    tau: &TorqueCommand,
) -> Result<Vector3<f64>> {
    let t = model.terms(p, state);
    t.solve_inertia(&(tau.tau - t.velocity - t.gravity))
}
