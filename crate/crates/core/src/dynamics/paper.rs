//! The closed-form Lagrange–Euler terms exactly as published for this arm.
//!
//! Every coefficient is kept as printed, including the `a2²·m3` term and the
//! `1/3` coupling factor in `M23`. With the default parameters this makes
//! the lower 2×2 inertia block indefinite; see [`super::slender_rod`] for the
//! self-consistent variant used as the default simulation plant.

#[cfg(not(feature = "std"))]
use nalgebra::ComplexField;
use nalgebra::{Matrix3, Vector3};

use crate::ManipulatorParams;

const THIRD: f64 = 1.0 / 3.0;
const SIXTH: f64 = 1.0 / 6.0;

pub fn inertia_matrix(p: &ManipulatorParams, theta: &Vector3<f64>) -> Matrix3<f64> {
    let ManipulatorParams {
        a1, a2, a3, m1, m2, m3, ..
    } = *p;
    let c2 = theta[1].cos();
    let c3 = theta[2].cos();
    let c23 = (theta[1] + theta[2]).cos();

    let m11 = 0.5 * m1 * a1 * a1
        + 0.5 * m1 * a2 * a2
        + m3 * (a2 * a2 * c2 * c2 + THIRD * a3 * a3 * c23 * c23 + a2 * a3 * c23 * c2)
        + THIRD * m2 * a2 * a2 * c2 * c2;
    let m22 = THIRD * a2 * a2 * m2 + a2 * a2 * m3 + THIRD * a3 * a3 * m3 + a2 * a3 * m3 * c3;
    let m23 = THIRD * a3 * a3 * m3 + a2 * a2 * m3 + THIRD * a2 * a3 * m3 * c3;
    let m33 = THIRD * m3 * a3 * a3;

    Matrix3::new(
        m11, 0.0, 0.0, //
        0.0, m22, m23, //
        0.0, m23, m33,
    )
}

pub fn velocity_vector(p: &ManipulatorParams, theta: &Vector3<f64>, omega: &Vector3<f64>) -> Vector3<f64> {
    let ManipulatorParams { a2, a3, m2, m3, .. } = *p;
    let (t2, t3) = (theta[1], theta[2]);
    let (w1, w2, w3) = (omega[0], omega[1], omega[2]);
    let s3 = t3.sin();
    let c2 = t2.cos();
    let s23 = (t2 + t3).sin();
    let s2_2 = (2.0 * t2).sin();
    let s2_23 = (2.0 * (t2 + t3)).sin();
    let s_22_3 = (2.0 * t2 + t3).sin();

    let v1 = (-4.0 * THIRD * m2 * a2 * a2 * s2_2 - THIRD * m3 * a3 * a3 * s2_23 - m3 * a2 * a3 * s_22_3) * w1 * w2
        + (-THIRD * m3 * a3 * a3 * s2_23 - m3 * a2 * a3 * c2 * s23) * w1 * w3;

    let v2 = (-m3 * a2 * a3 * s3) * w2 * w3
        + (-0.5 * m3 * a2 * a3 * s3) * w3 * w3
        + (SIXTH * m2 * a2 * a2 * s2_2
            + SIXTH * m3 * a3 * a3 * s2_23
            + 0.5 * m3 * a2 * a2 * s2_2
            + 0.5 * m3 * a2 * a3 * s_22_3)
            * w1
            * w1;

    let v3 =
        0.5 * m3 * a2 * a3 * s3 * w2 * w2 + (SIXTH * m3 * a3 * a3 * s2_23 + 0.5 * m3 * a2 * a3 * c2 * s23) * w1 * w1;

    Vector3::new(v1, v2, v3)
}

pub fn gravity_vector(p: &ManipulatorParams, theta: &Vector3<f64>) -> Vector3<f64> {
    let ManipulatorParams { a2, a3, m2, m3, g, .. } = *p;
    let c2 = theta[1].cos();
    let c23 = (theta[1] + theta[2]).cos();
    let g3 = 0.5 * m3 * g * a3 * c23;
    let g2 = g3 + 0.5 * m2 * g * a2 * c2 + m3 * g * a2 * c2;
    Vector3::new(0.0, g2, g3)
}
