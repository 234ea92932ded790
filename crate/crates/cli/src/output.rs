//! Trajectory CSV and metrics JSON writers.

use std::fs;
use std::io::Write;
use std::path::Path;

use armlqr_core::control::LqrGain;
use armlqr_core::sim::{ResponseMetrics, SimResult};
use serde::Serialize;

use crate::error::{CliError, Result};

pub const CSV_HEADER: [&str; 10] = [
    "t", "theta1", "theta2", "theta3", "omega1", "omega2", "omega3", "tau1", "tau2", "tau3",
];
pub const SIGNIFICANT_DIGITS: i32 = 9;
/// Decimal places are capped so tiny values do not produce long zero runs.
pub const MAX_DECIMALS: i32 = 12;

/// Fixed-point rendering with [`SIGNIFICANT_DIGITS`] significant digits.
pub fn fixed9(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let decimals = |mag: f64| {
        let int_digits = if mag == 0.0 { 1 } else { mag.log10().floor() as i32 + 1 };
        (SIGNIFICANT_DIGITS - int_digits).clamp(0, MAX_DECIMALS) as usize
    };
    let mut d = decimals(v.abs());
    let mut s = format!("{v:.d$}");
    // Rounding can carry into a new leading digit (9.99999999951 -> 10.0000000).
    let rounded: f64 = s.parse().unwrap_or(v);
    let d2 = decimals(rounded.abs());
    if d2 < d {
        d = d2;
        s = format!("{v:.d$}");
    }
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s.remove(0);
    }
    s
}

pub fn trajectory_csv(result: &SimResult) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let encode = |e: csv::Error| CliError::Encode(e.to_string());
    w.write_record(CSV_HEADER).map_err(encode)?;
    for ((t, s), u) in result.times.iter().zip(&result.states).zip(&result.torques) {
        let row = [
            *t, s.theta[0], s.theta[1], s.theta[2], s.omega[0], s.omega[1], s.omega[2], u.tau[0], u.tau[1], u.tau[2],
        ];
        w.write_record(row.iter().map(|v| fixed9(*v))).map_err(encode)?;
    }
    w.into_inner().map_err(|e| CliError::Encode(e.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct JointMetrics {
    /// `null` when the joint never enters its band for good.
    pub settling_time_s: Option<f64>,
    pub settled: bool,
    pub overshoot_pct: f64,
    pub zero_step: bool,
    pub peak_velocity_rad_s: f64,
    pub steady_state_error_rad: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub controller: String,
    pub plant: String,
    pub dt: f64,
    pub duration: f64,
    pub substeps: u32,
    pub samples: usize,
    pub all_settled: bool,
    pub joints: Vec<JointMetrics>,
    pub cost: f64,
}

impl MetricsReport {
    pub fn new(controller: &str, plant: &str, dt: f64, duration: f64, substeps: u32, result: &SimResult) -> Self {
        let m = &result.metrics;
        Self {
            schema_version: crate::config::SCHEMA_VERSION,
            controller: controller.into(),
            plant: plant.into(),
            dt,
            duration,
            substeps,
            samples: result.times.len(),
            all_settled: m.settled.iter().all(|&s| s),
            joints: joint_metrics(m),
            cost: m.cost,
        }
    }
}

pub fn joint_metrics(m: &ResponseMetrics) -> Vec<JointMetrics> {
    (0..3)
        .map(|j| JointMetrics {
            settling_time_s: m.settled[j].then_some(m.settling_time[j]),
            settled: m.settled[j],
            overshoot_pct: m.overshoot_pct[j],
            zero_step: m.zero_step[j],
            peak_velocity_rad_s: m.peak_velocity[j],
            steady_state_error_rad: m.steady_state_error[j],
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct JointDelta {
    /// PID minus LQR; `null` if either run did not settle.
    pub settling_time_s: Option<f64>,
    pub overshoot_pct: f64,
    pub peak_velocity_rad_s: f64,
    pub steady_state_error_rad: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub lqr: MetricsReport,
    pub pid: MetricsReport,
    /// Per joint, PID minus LQR.
    pub delta: Vec<JointDelta>,
    pub lqr_settles_faster: bool,
    pub lqr_lower_peak_velocity: bool,
}

impl CompareReport {
    pub fn new(lqr: MetricsReport, pid: MetricsReport) -> Self {
        let delta: Vec<JointDelta> = lqr
            .joints
            .iter()
            .zip(&pid.joints)
            .map(|(l, p)| JointDelta {
                settling_time_s: l.settling_time_s.zip(p.settling_time_s).map(|(l, p)| p - l),
                overshoot_pct: p.overshoot_pct - l.overshoot_pct,
                peak_velocity_rad_s: p.peak_velocity_rad_s - l.peak_velocity_rad_s,
                steady_state_error_rad: p.steady_state_error_rad - l.steady_state_error_rad,
            })
            .collect();
        let lqr_settles_faster =
            lqr.joints
                .iter()
                .zip(&pid.joints)
                .all(|(l, p)| match (l.settling_time_s, p.settling_time_s) {
                    (Some(l), Some(p)) => l < p,
                    (Some(_), None) => true,
                    _ => false,
                });
        let lqr_lower_peak_velocity = delta.iter().all(|d| d.peak_velocity_rad_s > 0.0);
        Self {
            schema_version: crate::config::SCHEMA_VERSION,
            lqr,
            pid,
            delta,
            lqr_settles_faster,
            lqr_lower_peak_velocity,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GainReport {
    pub schema_version: u32,
    pub plant: String,
    pub operating_point_rad: [f64; 3],
    pub k: Vec<[f64; 6]>,
    pub s: Vec<[f64; 6]>,
    pub riccati_residual: f64,
    /// `[re, im]` pairs.
    pub closed_loop_poles: Vec<[f64; 2]>,
}

impl GainReport {
    pub fn new(plant: &str, theta: [f64; 3], gain: &LqrGain) -> Self {
        Self {
            schema_version: crate::config::SCHEMA_VERSION,
            plant: plant.into(),
            operating_point_rad: theta,
            k: (0..3).map(|i| core::array::from_fn(|j| gain.k[(i, j)])).collect(),
            s: (0..6).map(|i| core::array::from_fn(|j| gain.s[(i, j)])).collect(),
            riccati_residual: gain.residual,
            closed_loop_poles: gain.closed_loop_poles.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Encode(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}
