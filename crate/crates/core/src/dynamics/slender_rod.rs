//! Inertia and velocity-coupling terms derived consistently from uniform
//! slender-rod links, with velocity terms built from Christoffel symbols of
//! the inertia matrix.
//!
//! Differs from the published terms only where those are not derivable from
//! a single kinetic energy: `M23` uses the rod coupling `½·a2·a3·m3·cos θ3`
//! and carries no `a2²·m3` term, and `V` follows from `M`. The base-column
//! inertia `½·m1·(a1² + a2²)` about the vertical axis is kept as published so
//! `M11` stays positive in the upright pose. Gravity is identical.

#[cfg(not(feature = "std"))]
use nalgebra::ComplexField;
use nalgebra::{Matrix3, Vector3};

use crate::ManipulatorParams;

const THIRD: f64 = 1.0 / 3.0;

/// Constant inertia of the base column about the vertical axis.
pub fn base_inertia(p: &ManipulatorParams) -> f64 {
    0.5 * p.m1 * (p.a1 * p.a1 + p.a2 * p.a2)
}

pub fn inertia_matrix(p: &ManipulatorParams, theta: &Vector3<f64>) -> Matrix3<f64> {
    let ManipulatorParams { a2, a3, m2, m3, .. } = *p;
    let c2 = theta[1].cos();
    let c3 = theta[2].cos();
    let c23 = (theta[1] + theta[2]).cos();

    let m11 = base_inertia(p)
        + m3 * (a2 * a2 * c2 * c2 + THIRD * a3 * a3 * c23 * c23 + a2 * a3 * c23 * c2)
        + THIRD * m2 * a2 * a2 * c2 * c2;
    let m22 = THIRD * a2 * a2 * m2 + a2 * a2 * m3 + THIRD * a3 * a3 * m3 + a2 * a3 * m3 * c3;
    let m23 = THIRD * a3 * a3 * m3 + 0.5 * a2 * a3 * m3 * c3;
    let m33 = THIRD * m3 * a3 * a3;

    Matrix3::new(
        m11, 0.0, 0.0, //
        0.0, m22, m23, //
        0.0, m23, m33,
    )
}

/// Partial derivatives of [`inertia_matrix`] with respect to θ2 and θ3.
/// Nothing depends on θ1.
pub fn inertia_partials(p: &ManipulatorParams, theta: &Vector3<f64>) -> [Matrix3<f64>; 2] {
    let ManipulatorParams { a2, a3, m2, m3, .. } = *p;
    let (t2, t3) = (theta[1], theta[2]);
    let s2_2 = (2.0 * t2).sin();
    let s2_23 = (2.0 * (t2 + t3)).sin();
    let s_22_3 = (2.0 * t2 + t3).sin();
    let c2 = t2.cos();
    let s23 = (t2 + t3).sin();
    let s3 = t3.sin();

    let d11_d2 = -m3 * (a2 * a2 * s2_2 + THIRD * a3 * a3 * s2_23 + a2 * a3 * s_22_3) - THIRD * m2 * a2 * a2 * s2_2;
    let d11_d3 = -m3 * (THIRD * a3 * a3 * s2_23 + a2 * a3 * c2 * s23);
    let d22_d3 = -a2 * a3 * m3 * s3;
    let d23_d3 = -0.5 * a2 * a3 * m3 * s3;

    let mut by_t2 = Matrix3::zeros();
    by_t2[(0, 0)] = d11_d2;
    let by_t3 = Matrix3::new(
        d11_d3, 0.0, 0.0, //
        0.0, d22_d3, d23_d3, //
        0.0, d23_d3, 0.0,
    );
    [by_t2, by_t3]
}

/// `V = Ṁ·θ̇ − ½·[θ̇ᵀ (∂M/∂θi) θ̇]ᵢ`.
pub fn velocity_vector(p: &ManipulatorParams, theta: &Vector3<f64>, omega: &Vector3<f64>) -> Vector3<f64> {
    let [d2, d3] = inertia_partials(p, theta);
    let m_dot = d2 * omega[1] + d3 * omega[2];
    let quad = Vector3::new(0.0, omega.dot(&(d2 * omega)), omega.dot(&(d3 * omega)));
    m_dot * omega - quad * 0.5
}
