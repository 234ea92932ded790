//! Denavit–Hartenberg transform chain, forward kinematics and the closed-form
//! position inverse kinematics of the 3-DoF articulated arm.

use core::f64::consts::{FRAC_PI_2, PI};
use core::ops::Mul;

#[cfg(not(feature = "std"))]
use nalgebra::{ComplexField, RealField};
use nalgebra::{Matrix3, Matrix4, Vector3};

use crate::{Error, ManipulatorParams, Result};

pub type Point3 = nalgebra::Point3<f64>;

/// Slack allowed on law-of-cosines arguments before they count as out of range.
const COSINE_SLACK: f64 = 1e-9;

/// One row of a DH table: `(a, α, d, θ)` in meters and radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhRow {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    pub theta: f64,
}

/// Rigid transform split into its rotation and translation blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Transform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut h = Matrix4::identity();
        h.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        h.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        h
    }

    pub fn origin(&self) -> Point3 {
        Point3::from(self.translation)
    }
}

impl Mul for Transform {
    type Output = Transform;

    fn mul(self, rhs: Transform) -> Transform {
        Transform {
            rotation: self.rotation * rhs.rotation,
            translation: self.rotation * rhs.translation + self.translation,
        }
    }
}

/// Single-link DH transform.
pub fn dh_transform(row: &DhRow) -> Transform {
    let (st, ct) = row.theta.sin_cos();
    let (sa, ca) = row.alpha.sin_cos();
    Transform {
        rotation: Matrix3::new(
            ct,
            -st * ca,
            st * sa, //
            st,
            ct * ca,
            -ct * sa, //
            0.0,
            sa,
            ca,
        ),
        translation: Vector3::new(row.a * ct, row.a * st, row.d),
    }
}

/// DH table of the arm at joint angles `theta`.
pub fn dh_table(p: &ManipulatorParams, theta: &Vector3<f64>) -> [DhRow; 3] {
    [
        DhRow {
            a: 0.0,
            alpha: FRAC_PI_2,
            d: p.a1,
            theta: theta[0],
        },
        DhRow {
            a: p.a2,
            alpha: 0.0,
            d: 0.0,
            theta: theta[1],
        },
        DhRow {
            a: p.a3,
            alpha: 0.0,
            d: 0.0,
            theta: theta[2],
        },
    ]
}

/// Base-to-end-effector transform `T¹₀ T²₁ T³₂`.
pub fn chain_transform(p: &ManipulatorParams, theta: &Vector3<f64>) -> Transform {
    dh_table(p, theta)
        .iter()
        .map(dh_transform)
        .fold(Transform::identity(), |acc, t| acc * t)
}

/// Origins of the base, shoulder, elbow and end-effector frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPoints {
    pub base: Point3,
    pub shoulder: Point3,
    pub elbow: Point3,
    pub end_effector: Point3,
}

impl LinkPoints {
    pub fn as_array(&self) -> [Point3; 4] {
        [self.base, self.shoulder, self.elbow, self.end_effector]
    }
}

pub fn forward_kinematics(p: &ManipulatorParams, theta: &Vector3<f64>) -> LinkPoints {
    let (s1, c1) = theta[0].sin_cos();
    let (s2, c2) = theta[1].sin_cos();
    let (s23, c23) = (theta[1] + theta[2]).sin_cos();
    let elbow_r = p.a2 * c2;
    let tip_r = p.a3 * c23 + p.a2 * c2;
    LinkPoints {
        base: Point3::origin(),
        shoulder: Point3::new(0.0, 0.0, p.a1),
        elbow: Point3::new(elbow_r * c1, elbow_r * s1, p.a2 * s2 + p.a1),
        end_effector: Point3::new(tip_r * c1, tip_r * s1, p.a3 * s23 + p.a2 * s2 + p.a1),
    }
}

/// Closed-form position IK returning the branch with `θ3 = π − φ3 ≥ 0`.
pub fn inverse_kinematics(p: &ManipulatorParams, target: &Point3) -> Result<Vector3<f64>> {
    if !(target.x.is_finite() && target.y.is_finite() && target.z.is_finite()) {
        return Err(Error::NonFinite("target point"));
    }
    let r1 = target.x.hypot(target.y);
    if r1 == 0.0 {
        return Err(Error::SingularTarget);
    }
    let theta1 = target.y.atan2(target.x);
    let r2 = target.z - p.a1;
    let phi2 = r2.atan2(r1);
    let r3 = r1.hypot(r2);

    let unreachable = || Error::Unreachable {
        distance: r3,
        min: (p.a2 - p.a3).abs(),
        max: p.a2 + p.a3,
    };
    if r3 == 0.0 {
        return Err(unreachable());
    }

    let phi1 = clamped_acos((p.a3 * p.a3 - p.a2 * p.a2 - r3 * r3) / (-2.0 * p.a2 * r3)).ok_or_else(unreachable)?;
    let phi3 = clamped_acos((r3 * r3 - p.a2 * p.a2 - p.a3 * p.a3) / (-2.0 * p.a2 * p.a3)).ok_or_else(unreachable)?;

    Ok(Vector3::new(theta1, phi2 - phi1, PI - phi3))
}

fn clamped_acos(c: f64) -> Option<f64> {
    if c.is_nan() || c.abs() > 1.0 + COSINE_SLACK {
        None
    } else {
        Some(c.clamp(-1.0, 1.0).acos())
    }
}
