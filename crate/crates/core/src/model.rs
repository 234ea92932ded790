//! Physical parameters and joint-space state shared by every other module.

use nalgebra::{Vector3, Vector6};

use crate::{Error, Result};

/// Total mass of the arm in the reference build, in kg.
pub const REFERENCE_TOTAL_MASS: f64 = 2.5;

const MASS_TOLERANCE: f64 = 1e-9;

/// Link lengths, per-link masses and gravity, in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManipulatorParams {
    /// Base column height (m).
    pub a1: f64,
    /// Upper-arm length (m).
    pub a2: f64,
    /// Forearm length (m).
    pub a3: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    /// Gravitational acceleration (m/s²).
    pub g: f64,
    /// Total mass (kg). Bookkeeping only; must equal `m1 + m2 + m3`.
    pub m_total: f64,
}

impl ManipulatorParams {
    /// Builds a parameter set from link lengths and a total mass, splitting the
    /// mass between the links in proportion to their length (uniform linear
    /// density).
    pub fn with_proportional_masses(a1: f64, a2: f64, a3: f64, m_total: f64, g: f64) -> Self {
        let length = a1 + a2 + a3;
        let m1 = m_total * a1 / length;
        let m2 = m_total * a2 / length;
        // Remainder keeps the split exact to the last bit.
        let m3 = m_total - m1 - m2;
        Self {
            a1,
            a2,
            a3,
            m1,
            m2,
            m3,
            g,
            m_total,
        }
    }

    /// Maximum distance of the wrist point from the shoulder.
    pub fn reach(&self) -> f64 {
        self.a2 + self.a3
    }
}

impl Default for ManipulatorParams {
    fn default() -> Self {
        default_params()
    }
}

/// 25/15/15 cm links, 2.5 kg split proportionally to length, g = 9.81 m/s².
pub fn default_params() -> ManipulatorParams {
    ManipulatorParams::with_proportional_masses(0.25, 0.15, 0.15, REFERENCE_TOTAL_MASS, 9.81)
}

pub fn validate_params(p: &ManipulatorParams) -> Result<()> {
    let fields = [
        ("a1", p.a1),
        ("a2", p.a2),
        ("a3", p.a3),
        ("m1", p.m1),
        ("m2", p.m2),
        ("m3", p.m3),
        ("g", p.g),
        ("m_total", p.m_total),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            return Err(Error::NonFinite(name));
        }
        if value <= 0.0 {
            return Err(Error::NonPositiveDimension { name, value });
        }
    }
    let sum = p.m1 + p.m2 + p.m3;
    if (sum - p.m_total).abs() > MASS_TOLERANCE {
        return Err(Error::MassMismatch { sum, total: p.m_total });
    }
    Ok(())
}

/// Joint angles (rad) and angular velocities (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointState {
    pub theta: Vector3<f64>,
    pub omega: Vector3<f64>,
}

impl JointState {
    pub fn new(theta: Vector3<f64>, omega: Vector3<f64>) -> Self {
        Self { theta, omega }
    }

    /// A state at rest at the given pose.
    pub fn at_rest(theta: Vector3<f64>) -> Self {
        Self {
            theta,
            omega: Vector3::zeros(),
        }
    }

    /// Stacks `(θ1, θ2, θ3, θ̇1, θ̇2, θ̇3)`.
    pub fn to_vector(&self) -> Vector6<f64> {
        let mut x = Vector6::zeros();
        x.fixed_rows_mut::<3>(0).copy_from(&self.theta);
        x.fixed_rows_mut::<3>(3).copy_from(&self.omega);
        x
    }

    pub fn from_vector(x: &Vector6<f64>) -> Self {
        Self {
            theta: x.fixed_rows::<3>(0).into_owned(),
            omega: x.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().chain(self.omega.iter()).all(|v| v.is_finite())
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite("joint state"))
        }
    }
}

/// Joint torques (N·m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TorqueCommand {
    pub tau: Vector3<f64>,
}

impl TorqueCommand {
    pub fn new(tau: Vector3<f64>) -> Self {
        Self { tau }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_finite(&self) -> bool {
        self.tau.iter().all(|v| v.is_finite())
    }

    /// Clamps each component to `±limit`.
    pub fn clamped(&self, limit: &Vector3<f64>) -> Self {
        Self {
            tau: self.tau.zip_map(limit, |t, l| t.clamp(-l, l)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_match_reference_build() {
        let p = default_params();
        assert_eq!((p.a1, p.a2, p.a3, p.m_total), (0.25, 0.15, 0.15, 2.5));
        // m_i = 2.5 · a_i / 0.55
        assert!((p.m1 - 1.136_363_636_363_636).abs() < 1e-12);
        assert!((p.m2 - 0.681_818_181_818_181_8).abs() < 1e-12);
        assert!((p.m3 - 0.681_818_181_818_181_8).abs() < 1e-12);
        assert!((p.m1 + p.m2 + p.m3 - 2.5).abs() < 1e-9);
        assert_eq!(p.g, 9.81);
    }

    #[test]
    fn validation() {
        assert_eq!(validate_params(&default_params()), Ok(()));

        let p = ManipulatorParams {
            a2: 0.0,
            ..default_params()
        };
        assert!(matches!(
            validate_params(&p),
            Err(Error::NonPositiveDimension { name: "a2", .. })
        ));

        let p = ManipulatorParams {
            m1: 1.0,
            m2: 1.0,
            m3: 1.0,
            ..default_params()
        };
        assert!(matches!(validate_params(&p), Err(Error::MassMismatch { .. })));

        let p = ManipulatorParams {
            g: f64::NAN,
            ..default_params()
        };
        assert_eq!(validate_params(&p), Err(Error::NonFinite("g")));
    }

    #[test]
    fn state_vector_layout() {
        let s = JointState::new(Vector3::new(1.0, 2.0, 3.0), Vector3::new(4.0, 5.0, 6.0));
        let x = s.to_vector();
        assert_eq!(x.as_slice(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(JointState::from_vector(&x), s);
        let bad = JointState::new(Vector3::new(f64::INFINITY, 0.0, 0.0), Vector3::zeros());
        assert_eq!(bad.validate(), Err(Error::NonFinite("joint state")));
    }

    #[test]
    fn torque_clamp() {
        let t = TorqueCommand::new(Vector3::new(3.0, -4.0, 0.5));
        let c = t.clamped(&Vector3::new(1.0, 2.0, 1.0));
        assert_eq!(c.tau, Vector3::new(1.0, -2.0, 0.5));
    }
}
