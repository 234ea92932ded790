use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-positive dimension: {name} = {value}")]
    NonPositiveDimension { name: &'static str, value: f64 },

    #[error("link masses sum to {sum} kg but total mass is {total} kg")]
    MassMismatch { sum: f64, total: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("target unreachable: wrist distance {distance} m outside [{min}, {max}] m")]
    Unreachable { distance: f64, min: f64, max: f64 },

    #[error("target lies on the base axis; base angle is undefined")]
    SingularTarget,

    #[error("inertia matrix is numerically singular (condition number {condition:e})")]
    SingularInertia { condition: f64 },

    #[error("invalid weights: {0}")]
    InvalidWeights(&'static str),

    #[error("no stabilizing Riccati solution: {0}")]
    NoStabilizingSolution(&'static str),

    #[error("simulation diverged at t = {time} s")]
    Diverged { time: f64 },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(&'static str),
}
