//! Full-state-feedback LQR synthesis, the per-joint PID baseline and the
//! quadratic cost used to score trajectories.

use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, Matrix3, SymmetricEigen, Vector3, Vector6};

use crate::linearize::{Matrix3x6, Matrix6, StateSpaceModel};
use crate::{Error, JointState, Result, TorqueCommand};

pub mod riccati;

pub use riccati::solve_are;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// State and input weights of `J = ∫ xᵀQx + uᵀRu dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqrWeights {
    pub q: Matrix6,
    pub r: Matrix3<f64>,
}

impl LqrWeights {
    pub fn diagonal(q: [f64; 6], r: [f64; 3]) -> Self {
        Self {
            q: Matrix6::from_diagonal(&Vector6::from(q)),
            r: Matrix3::from_diagonal(&Vector3::from(r)),
        }
    }

    /// `Q = diag(10⁴, 10⁴, 10⁴, 800, 500, 500)`, `R = I`.
    pub fn reference() -> Self {
        Self::diagonal([10_000.0, 10_000.0, 10_000.0, 800.0, 500.0, 500.0], [1.0, 1.0, 1.0])
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            q: self.q * c,
            r: self.r * c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.q.iter().chain(self.r.iter()).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("LQR weights"));
        }
        if (self.q - self.q.transpose()).amax() > SYMMETRY_TOLERANCE * self.q.amax().max(1.0) {
            return Err(Error::InvalidWeights("Q is not symmetric"));
        }
        if (self.r - self.r.transpose()).amax() > SYMMETRY_TOLERANCE * self.r.amax().max(1.0) {
            return Err(Error::InvalidWeights("R is not symmetric"));
        }
        let q_min = SymmetricEigen::new(self.q).eigenvalues.min();
        if q_min < -SYMMETRY_TOLERANCE * self.q.amax().max(1.0) {
            return Err(Error::InvalidWeights("Q is not positive semidefinite"));
        }
        let r_min = SymmetricEigen::new(self.r).eigenvalues.min();
        if !(r_min > 0.0) {
            return Err(Error::InvalidWeights("R is not positive definite"));
        }
        Ok(())
    }
}

impl Default for LqrWeights {
    fn default() -> Self {
        Self::reference()
    }
}

/// Optimal gain and the Riccati solution it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LqrGain {
    pub k: Matrix3x6,
    pub s: Matrix6,
    /// Scaled residual `‖AᵀS + SA − SBR⁻¹BᵀS + Q‖_max / max(‖Q‖_max, 1)`.
    pub residual: f64,
    pub closed_loop_poles: Vec<Complex<f64>>,
}

impl LqrGain {
    pub fn spectral_abscissa(&self) -> f64 {
        self.closed_loop_poles
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn lqr_gain(model: &StateSpaceModel, w: &LqrWeights) -> Result<LqrGain> {
    w.validate()?;
    let a = to_dynamic(&model.a);
    let b = to_dynamic(&model.b);
    let q = to_dynamic(&w.q);
    let r = to_dynamic(&w.r);
    let s = solve_are(&a, &b, &q, &r)?;
    let r_inv = r.clone().try_inverse().ok_or(Error::InvalidWeights("R is singular"))?;
    let k = &r_inv * b.transpose() * &s;
    let residual = riccati::riccati_residual(&a, &b, &q, &r_inv, &s) / w.q.amax().max(1.0);
    let closed_loop_poles = riccati::eigenvalues(&(&a - &b * &k));
    Ok(LqrGain {
        k: Matrix3x6::from_column_slice(k.as_slice()),
        s: Matrix6::from_column_slice(s.as_slice()),
        residual,
        closed_loop_poles,
    })
}

fn to_dynamic<const R: usize, const C: usize>(m: &nalgebra::SMatrix<f64, R, C>) -> DMatrix<f64> {
    DMatrix::from_column_slice(R, C, m.as_slice())
}

/// `τ = τ_ff − K·(x − x_ref)`. With a zero reference and zero feedforward
/// this is the plain regulator `u = −K·x`.
pub fn lqr_control(
    gain: &LqrGain,
    state: &JointState,
    reference: &JointState,
    feedforward: &TorqueCommand,
) -> TorqueCommand {
    let error = state.to_vector() - reference.to_vector();
    TorqueCommand::new(feedforward.tau - gain.k * error)
}

/// Per-joint PID gains. The integral term is clamped to `±integral_limit`
/// (N·m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: Vector3<f64>,
    pub ki: Vector3<f64>,
    pub kd: Vector3<f64>,
    pub integral_limit: Vector3<f64>,
}

impl PidGains {
    pub fn validate(&self) -> Result<()> {
        let all = self
            .kp
            .iter()
            .chain(self.ki.iter())
            .chain(self.kd.iter())
            .chain(self.integral_limit.iter());
        if !all.clone().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("PID gains"));
        }
        if self.kp.iter().chain(self.kd.iter()).any(|&v| v < 0.0) {
            return Err(Error::InvalidWeights("PID kp and kd must be non-negative"));
        }
        if self.integral_limit.iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidWeights("PID integral limit must be positive"));
        }
        Ok(())
    }
}

impl Default for PidGains {
    /// Baseline gains for the default arm, tuned by hand on the reference
    /// point-to-point move: every joint converges, with 25–40 % overshoot.
    fn default() -> Self {
        Self {
            kp: Vector3::new(8.6, 5.0, 1.5),
            ki: Vector3::new(2.0, 2.0, 0.5),
            kd: Vector3::new(0.43, 0.3, 0.06),
            integral_limit: Vector3::new(1.0, 1.0, 1.0),
        }
    }
}

/// One PID update with derivative on measurement:
/// `τ = τ_ff + kp·e + I − kd·θ̇`, `I ← clamp(I + ki·e·dt)`.
/// Returns the torque and the updated integral term.
pub fn pid_control(
    gains: &PidGains,
    state: &JointState,
    reference: &JointState,
    integral: &Vector3<f64>,
    dt: f64,
    feedforward: &TorqueCommand,
) -> (TorqueCommand, Vector3<f64>) {
    let error = reference.theta - state.theta;
    let integral = Vector3::from_fn(|i, _| {
        let limit = gains.integral_limit[i];
        (integral[i] + gains.ki[i] * error[i] * dt).clamp(-limit, limit)
    });
    let tau = feedforward.tau + gains.kp.component_mul(&error) + integral - gains.kd.component_mul(&state.omega);
    (TorqueCommand::new(tau), integral)
}

/// One rectangle-rule sample of the cost integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSample {
    pub state_error: Vector6<f64>,
    pub torque_delta: Vector3<f64>,
    pub dt: f64,
}

/// `J = Σ (xᵀQx + uᵀRu)·dt`.
pub fn quadratic_cost<'a>(samples: impl IntoIterator<Item = &'a CostSample>, w: &LqrWeights) -> f64 {
    samples
        .into_iter()
        .map(|s| {
            let x = &s.state_error;
            let u = &s.torque_delta;
            (x.dot(&(w.q * x)) + u.dot(&(w.r * u))) * s.dt
        })
        .sum()
}
