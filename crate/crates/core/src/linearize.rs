//! Linear state-space model of the arm about a static pose.
//!
//! The state is `x = (θ, θ̇)` measured from the operating point and the input
//! is the torque measured from the gravity-holding torque, so the model is a
//! genuine LTI system in error coordinates:
//!
//! ```text
//! ẋ = A·x + B·u,   y = C·x + D·u
//! A = [ 0      I     ]    B = [ 0   ]    C = [ I  0 ]    D = 0
//!     [ ∂θ̈/∂θ  ∂θ̈/∂θ̇ ]        [ M⁻¹ ]
//! ```
//!
//! The lower blocks of `A` come from central differences of the forward
//! dynamics; `B` is exact because `θ̈` is affine in `τ`.

use nalgebra::{Matrix3, SMatrix, Vector3};

use crate::dynamics::{forward_dynamics, inverse_inertia, PlantModel};
use crate::{JointState, ManipulatorParams, Result, TorqueCommand};

pub type Matrix6 = SMatrix<f64, 6, 6>;
pub type Matrix6x3 = SMatrix<f64, 6, 3>;
pub type Matrix3x6 = SMatrix<f64, 3, 6>;

/// Default central-difference step for angles (rad) and rates (rad/s).
pub const DEFAULT_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSpaceModel {
    pub a: Matrix6,
    pub b: Matrix6x3,
    pub c: Matrix3x6,
    pub d: Matrix3<f64>,
    pub operating_state: JointState,
    pub operating_torque: TorqueCommand,
}

impl StateSpaceModel {
    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(self.b.iter()).all(|v| v.is_finite())
    }
}

/// Torque that holds the arm at rest at `theta`: `G(θ)`.
pub fn equilibrium_torque(model: PlantModel, p: &ManipulatorParams, theta: &Vector3<f64>) -> TorqueCommand {
    TorqueCommand::new(model.gravity(p, theta))
}

pub fn linearize_about(model: PlantModel, p: &ManipulatorParams, theta0: &Vector3<f64>) -> Result<StateSpaceModel> {
    linearize_with_step(model, p, theta0, DEFAULT_STEP)
}

pub fn linearize_with_step(
    model: PlantModel,
    p: &ManipulatorParams,
    theta0: &Vector3<f64>,
    step: f64,
) -> Result<StateSpaceModel> {
    let operating_state = JointState::at_rest(*theta0);
    let operating_torque = equilibrium_torque(model, p, theta0);
    let x0 = operating_state.to_vector();

    let mut a = Matrix6::zeros();
    a.fixed_view_mut::<3, 3>(0, 3).copy_from(&Matrix3::identity());
    for j in 0..6 {
        let mut plus = x0;
        let mut minus = x0;
        plus[j] += step;
        minus[j] -= step;
        let ap = forward_dynamics(model, p, &JointState::from_vector(&plus), &operating_torque)?;
        let am = forward_dynamics(model, p, &JointState::from_vector(&minus), &operating_torque)?;
        a.fixed_view_mut::<3, 1>(3, j).copy_from(&((ap - am) / (2.0 * step)));
    }

    let mut b = Matrix6x3::zeros();
    b.fixed_view_mut::<3, 3>(3, 0)
        .copy_from(&inverse_inertia(&model.inertia(p, theta0))?);

    let mut c = Matrix3x6::zeros();
    c.fixed_view_mut::<3, 3>(0, 0).copy_from(&Matrix3::identity());

    Ok(StateSpaceModel {
        a,
        b,
        c,
        d: Matrix3::zeros(),
        operating_state,
        operating_torque,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::default_params;
    use crate::sim::rk4_step;
    use core::f64::consts::FRAC_PI_2;
    use nalgebra::Vector6;

    const MODELS: [PlantModel; 2] = [PlantModel::Paper, PlantModel::SlenderRod];
    const TARGET: Vector3<f64> = Vector3::new(1.0304, -0.3373, 0.3349);

    /// `∂θ̈/∂θ` at rest under the holding torque is `−M⁻¹·∂G/∂θ`.
    fn exact_stiffness_block(model: PlantModel, p: &ManipulatorParams, th: &Vector3<f64>) -> Matrix3<f64> {
        let ManipulatorParams { a2, a3, m2, m3, g, .. } = *p;
        let s2 = th[1].sin();
        let s23 = (th[1] + th[2]).sin();
        let d3 = -0.5 * m3 * g * a3 * s23;
        let d2 = d3 - (0.5 * m2 + m3) * g * a2 * s2;
        let dg = Matrix3::new(0.0, 0.0, 0.0, 0.0, d2, d3, 0.0, d3, d3);
        -inverse_inertia(&model.inertia(p, th)).unwrap() * dg
    }

    #[test]
    fn block_structure() {
        let p = default_params();
        for model in MODELS {
            let ss = linearize_about(model, &p, &TARGET).unwrap();
            assert!(ss.is_finite());
            assert_eq!(ss.a.fixed_view::<3, 3>(0, 0).into_owned(), Matrix3::zeros());
            assert_eq!(ss.a.fixed_view::<3, 3>(0, 3).into_owned(), Matrix3::identity());
            assert_eq!(ss.b.fixed_view::<3, 3>(0, 0).into_owned(), Matrix3::zeros());
            let lower = ss.b.fixed_view::<3, 3>(3, 0).into_owned();
            assert_eq!(lower, lower.transpose());
            let m = model.inertia(&p, &TARGET);
            assert!((lower * m - Matrix3::identity()).amax() < 1e-9);
            assert_eq!(ss.c.fixed_view::<3, 3>(0, 0).into_owned(), Matrix3::identity());
            assert_eq!(ss.c.fixed_view::<3, 3>(0, 3).into_owned(), Matrix3::zeros());
            assert_eq!(ss.d, Matrix3::zeros());
            assert_eq!(ss.operating_torque, equilibrium_torque(model, &p, &TARGET));
        }
    }

    #[test]
    fn damping_block_vanishes_at_rest() {
        let p = default_params();
        for model in MODELS {
            for th in [Vector3::new(0.0, FRAC_PI_2, 0.0), TARGET, Vector3::new(-2.0, 0.4, 2.5)] {
                let ss = linearize_about(model, &p, &th).unwrap();
                assert!(ss.a.fixed_view::<3, 3>(3, 3).amax() < 1e-6);
            }
        }
    }

    #[test]
    fn equilibrium_torque_examples() {
        let p = default_params();
        let up = equilibrium_torque(PlantModel::SlenderRod, &p, &Vector3::new(0.3, FRAC_PI_2, 0.0));
        assert!(up.tau.amax() < 1e-15);
        let zero = equilibrium_torque(PlantModel::SlenderRod, &p, &Vector3::zeros());
        assert_eq!(zero.tau[0], 0.0);
        assert!((zero.tau[2] - 0.501_647_727_272_727_3).abs() < 1e-15);
    }

    #[test]
    fn stiffness_block_matches_gravity_gradient() {
        let p = default_params();
        for model in MODELS {
            let ss = linearize_about(model, &p, &TARGET).unwrap();
            let exact = exact_stiffness_block(model, &p, &TARGET);
            let fd = ss.a.fixed_view::<3, 3>(3, 0).into_owned();
            assert!((fd - exact).amax() < 1e-6 * exact.amax(), "{fd} vs {exact}");
        }
    }

    #[test]
    fn difference_error_is_second_order() {
        let p = default_params();
        let th = Vector3::new(0.2, 0.5, -0.8);
        for model in MODELS {
            let exact = exact_stiffness_block(model, &p, &th);
            let coarse = linearize_with_step(model, &p, &th, 0.02).unwrap();
            let fine = linearize_with_step(model, &p, &th, 0.01).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let e1 = (coarse.a[(3 + i, j)] - exact[(i, j)]).abs();
                    let e2 = (fine.a[(3 + i, j)] - exact[(i, j)]).abs();
                    if e1 > 1e-7 {
                        let ratio = e1 / e2;
                        assert!((3.2..=4.8).contains(&ratio), "{model:?} ({i},{j}) ratio {ratio}");
                    }
                }
            }
        }
    }

    #[test]
    fn linear_model_tracks_one_nonlinear_step() {
        let p = default_params();
        let dt = 1e-3;
        for model in MODELS {
            let ss = linearize_about(model, &p, &TARGET).unwrap();
            let dx = Vector6::new(0.01, -0.01, 0.01, 0.0, 0.0, 0.0);
            let start = JointState::from_vector(&(ss.operating_state.to_vector() + dx));
            let next = rk4_step(model, &p, &start, &ss.operating_torque, dt).unwrap();
            // Exact discretization of the linear model over one step.
            let phi = (ss.a * dt).exp();
            let lin = ss.operating_state.to_vector() + phi * dx;
            let err = (next.to_vector() - lin).fixed_rows::<3>(0).amax();
            assert!(err < 1e-5, "{model:?}: {err}");
        }
    }
}
