//! Numerical Lagrangian for uniform slender-rod links.
//!
//! Kinetic energy comes from the endpoint velocities of each rod, which are
//! taken from the DH frame chain through the geometric Jacobian. `M` is read
//! off the quadratic form, `G` is the gradient of the potential energy and
//! `V = Ṁ·θ̇ − ∂T/∂θ`, both by central differences. None of this touches the
//! closed-form expressions, so it serves as an independent check of them.

use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};

use crate::dynamics::{DynamicsTerms, PlantModel};
use crate::kinematics::{dh_table, dh_transform, Transform};
use crate::{JointState, ManipulatorParams};

const DIFF_STEP: f64 = 1e-5;

/// Rigid-body energy model of the arm.
#[derive(Debug, Clone, Copy)]
pub struct RodLagrangian {
    pub params: ManipulatorParams,
    /// Inertia of the base column about the vertical axis. A slender rod on
    /// its own axis has none.
    pub base_inertia: f64,
}

struct Frames {
    /// Joint axes z0, z1, z2 in the base frame.
    axes: [Vector3<f64>; 3],
    /// Frame origins o0..o3.
    origins: [Vector3<f64>; 4],
}

impl RodLagrangian {
    pub fn new(params: ManipulatorParams, base_inertia: f64) -> Self {
        Self { params, base_inertia }
    }

    fn frames(&self, theta: &Vector3<f64>) -> Frames {
        let mut t = Transform::identity();
        let mut axes = [Vector3::zeros(); 3];
        let mut origins = [Vector3::zeros(); 4];
        for (i, row) in dh_table(&self.params, theta).iter().enumerate() {
            axes[i] = t.rotation.column(2).into_owned();
            origins[i] = t.translation;
            t = t * dh_transform(row);
        }
        origins[3] = t.translation;
        Frames { axes, origins }
    }

    /// Velocity of a point carried by joints `0..moved_by`.
    fn point_velocity(f: &Frames, point: &Vector3<f64>, moved_by: usize, omega: &Vector3<f64>) -> Vector3<f64> {
        (0..moved_by).fold(Vector3::zeros(), |v, i| {
            v + f.axes[i].cross(&(point - f.origins[i])) * omega[i]
        })
    }

    pub fn kinetic_energy(&self, theta: &Vector3<f64>, omega: &Vector3<f64>) -> f64 {
        let f = self.frames(theta);
        let rod = |m: f64, va: Vector3<f64>, vb: Vector3<f64>| m / 6.0 * (va.dot(&va) + va.dot(&vb) + vb.dot(&vb));
        let p = &self.params;

        let shoulder = Self::point_velocity(&f, &f.origins[1], 2, omega);
        let elbow_on_2 = Self::point_velocity(&f, &f.origins[2], 2, omega);
        let elbow_on_3 = Self::point_velocity(&f, &f.origins[2], 3, omega);
        let tip = Self::point_velocity(&f, &f.origins[3], 3, omega);

        0.5 * self.base_inertia * omega[0] * omega[0] + rod(p.m2, shoulder, elbow_on_2) + rod(p.m3, elbow_on_3, tip)
    }

    pub fn potential_energy(&self, theta: &Vector3<f64>) -> f64 {
        let f = self.frames(theta);
        let p = &self.params;
        let z = |i: usize| f.origins[i].z;
        p.g * (p.m1 * 0.5 * (z(0) + z(1)) + p.m2 * 0.5 * (z(1) + z(2)) + p.m3 * 0.5 * (z(2) + z(3)))
    }

    /// Hessian of the kinetic energy in θ̇, by polarization (exact for a
    /// quadratic form).
    pub fn inertia(&self, theta: &Vector3<f64>) -> Matrix3<f64> {
        let t = |w: Vector3<f64>| self.kinetic_energy(theta, &w);
        let mut m = Matrix3::zeros();
        for i in 0..3 {
            m[(i, i)] = 2.0 * t(Vector3::ith(i, 1.0));
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                let both = t(Vector3::ith(i, 1.0) + Vector3::ith(j, 1.0));
                let v = both - 0.5 * (m[(i, i)] + m[(j, j)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    pub fn gravity(&self, theta: &Vector3<f64>) -> Vector3<f64> {
        Vector3::from_fn(|i, _| {
            let e = Vector3::ith(i, DIFF_STEP);
            (self.potential_energy(&(theta + e)) - self.potential_energy(&(theta - e))) / (2.0 * DIFF_STEP)
        })
    }

    /// `Ṁ·θ̇ − ∂T/∂θ`.
    pub fn velocity(&self, theta: &Vector3<f64>, omega: &Vector3<f64>) -> Vector3<f64> {
        let h = DIFF_STEP;
        let m_dot = (self.inertia(&(theta + omega * h)) - self.inertia(&(theta - omega * h))) / (2.0 * h);
        let dt_dtheta = Vector3::from_fn(|i, _| {
            let e = Vector3::ith(i, h);
            (self.kinetic_energy(&(theta + e), omega) - self.kinetic_energy(&(theta - e), omega)) / (2.0 * h)
        });
        m_dot * omega - dt_dtheta
    }

    pub fn terms(&self, state: &JointState) -> DynamicsTerms {
        DynamicsTerms {
            inertia: self.inertia(&state.theta),
            velocity: self.velocity(&state.theta, &state.omega),
            gravity: self.gravity(&state.theta),
        }
    }
}

/// Largest elementwise gaps between a closed-form model and the energy model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModelDeviation {
    pub inertia: f64,
    pub velocity: f64,
    pub gravity: f64,
    /// The `(row, col)` of the largest inertia gap.
    pub worst_inertia_entry: (usize, usize),
}

pub fn model_deviation(model: PlantModel, reference: &RodLagrangian, states: &[JointState]) -> ModelDeviation {
    let p = &reference.params;
    let mut out = ModelDeviation::default();
    for s in states {
        let closed = model.terms(p, s);
        let energy = reference.terms(s);
        let dm = (closed.inertia - energy.inertia).abs();
        let (idx, worst) = dm
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
        if worst > out.inertia {
            out.inertia = worst;
            out.worst_inertia_entry = (idx % 3, idx / 3);
        }
        out.velocity = out.velocity.max((closed.velocity - energy.velocity).amax());
        out.gravity = out.gravity.max((closed.gravity - energy.gravity).amax());
    }
    out
}

/// Deterministic grid of states for deviation reports.
pub fn sample_states(count: usize) -> Vec<JointState> {
    // Low-discrepancy additive recurrence over the six state coordinates.
    const STEPS: [f64; 6] = [
        0.754_877_666,
        0.569_840_291,
        0.430_159_709,
        0.324_717_957,
        0.245_122_333,
        0.185_037_617,
    ];
    let mut u = [0.5f64; 6];
    (0..count)
        .map(|_| {
            for (x, s) in u.iter_mut().zip(STEPS) {
                *x = (*x + s) % 1.0;
            }
            let angle = |x: f64| core::f64::consts::PI * (2.0 * x - 1.0);
            let rate = |x: f64| 4.0 * (2.0 * x - 1.0);
            JointState::new(
                Vector3::new(angle(u[0]), angle(u[1]), angle(u[2])),
                Vector3::new(rate(u[3]), rate(u[4]), rate(u[5])),
            )
        })
        .collect()
}
