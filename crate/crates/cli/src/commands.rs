//! Subcommand implementations. Each returns the text destined for stdout so
//! the binary stays a thin shell and tests can drive commands in-process.

use std::fmt::Write as _;
use std::path::PathBuf;

use armlqr_core::control::lqr_gain;
use armlqr_core::kinematics::{forward_kinematics, inverse_kinematics, Point3};
use armlqr_core::linearize::linearize_about;
use armlqr_core::sim::{simulate, SimResult};
use armlqr_core::ManipulatorParams;
use nalgebra::Vector3;

use crate::config::{cm_to_m, m_to_cm, ControllerKind, Experiment};
use crate::error::Result;
use crate::output::{self, CompareReport, GainReport, MetricsReport};

/// Four-decimal rendering without a negative zero.
pub fn fixed4(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

fn join4(values: &[f64]) -> String {
    values.iter().map(|v| fixed4(*v)).collect::<Vec<_>>().join(" ")
}

/// End-effector position in cm for joint angles in rad.
pub fn fk_cm(p: &ManipulatorParams, theta: [f64; 3]) -> [f64; 3] {
    let e = forward_kinematics(p, &Vector3::from(theta)).end_effector;
    [m_to_cm(e.x), m_to_cm(e.y), m_to_cm(e.z)]
}

pub fn ik_rad(p: &ManipulatorParams, point_cm: [f64; 3]) -> Result<[f64; 3]> {
    let target = Point3::new(cm_to_m(point_cm[0]), cm_to_m(point_cm[1]), cm_to_m(point_cm[2]));
    Ok(inverse_kinematics(p, &target)?.into())
}

pub fn fk(p: &ManipulatorParams, theta: [f64; 3]) -> String {
    join4(&fk_cm(p, theta)) + "\n"
}

pub fn ik(p: &ManipulatorParams, point_cm: [f64; 3]) -> Result<String> {
    Ok(join4(&ik_rad(p, point_cm)?) + "\n")
}

pub struct GainOutcome {
    pub text: String,
    pub report: GainReport,
    pub written: Option<PathBuf>,
}

/// LQR synthesis about the goal pose. The JSON dump is written only when an
/// output directory was given on the command line.
pub fn gain(exp: &Experiment, dump: bool) -> Result<GainOutcome> {
    let theta = exp.goal()?.theta;
    let model = linearize_about(exp.plant(), &exp.params, &theta)?;
    let g = lqr_gain(&model, &exp.weights)?;
    let report = GainReport::new(exp.plant().name(), theta.into(), &g);

    let mut text = String::new();
    let _ = writeln!(text, "plant: {}", exp.plant().name());
    let _ = writeln!(text, "operating point (rad): {}", join4(theta.as_slice()));
    let _ = writeln!(text, "K =");
    for row in &report.k {
        let _ = writeln!(
            text,
            "  {}",
            row.iter().map(|v| format!("{v:>12.4}")).collect::<String>()
        );
    }
    let _ = writeln!(text, "S =");
    for row in &report.s {
        let _ = writeln!(
            text,
            "  {}",
            row.iter().map(|v| format!("{v:>12.4e}")).collect::<String>()
        );
    }
    let _ = writeln!(text, "riccati residual (relative): {:.3e}", g.residual);
    let _ = writeln!(text, "closed-loop poles:");
    for [re, im] in &report.closed_loop_poles {
        let _ = writeln!(text, "  {re:.6e} {im:+.6e}i");
    }

    let written = if dump {
        let path = exp.output.dir.join("gain.json");
        output::write_file(&path, &output::to_json(&report)?)?;
        Some(path)
    } else {
        None
    };
    Ok(GainOutcome { text, report, written })
}

pub struct SimOutcome {
    pub result: SimResult,
    pub report: MetricsReport,
    pub csv: Vec<u8>,
    pub json: Vec<u8>,
}

pub fn run_simulation(exp: &Experiment, kind: ControllerKind) -> Result<SimOutcome> {
    let cfg = exp.sim_config(kind)?;
    let result = simulate(&exp.params, &cfg)?;
    let report = MetricsReport::new(
        cfg.controller.name(),
        cfg.plant.name(),
        cfg.dt,
        cfg.duration,
        cfg.substeps,
        &result,
    );
    let csv = output::trajectory_csv(&result)?;
    let json = output::to_json(&report)?;
    Ok(SimOutcome {
        result,
        report,
        csv,
        json,
    })
}

fn summary(report: &MetricsReport) -> String {
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{} on {} plant, {} samples",
        report.controller, report.plant, report.samples
    );
    for (j, m) in report.joints.iter().enumerate() {
        let settle = m
            .settling_time_s
            .map_or_else(|| "not settled".to_string(), |t| format!("settles {t:.3} s"));
        let _ = writeln!(
            text,
            "  joint {}: {settle}, overshoot {:.2} %, peak |omega| {:.3} rad/s, final error {:.2e} rad",
            j + 1,
            m.overshoot_pct,
            m.peak_velocity_rad_s,
            m.steady_state_error_rad
        );
    }
    text
}

/// Runs the configured controller and writes the trajectory CSV and metrics JSON.
pub fn simulate_cmd(exp: &Experiment) -> Result<String> {
    let out = run_simulation(exp, exp.controller)?;
    let (csv_path, json_path) = (exp.trajectory_path(), exp.metrics_path());
    output::write_file(&csv_path, &out.csv)?;
    output::write_file(&json_path, &out.json)?;
    let mut text = summary(&out.report);
    let _ = writeln!(text, "wrote {}", csv_path.display());
    let _ = writeln!(text, "wrote {}", json_path.display());
    Ok(text)
}

/// Runs LQR and PID on the same experiment (concurrently) and reports both.
pub fn compare(exp: &Experiment) -> Result<(CompareReport, Vec<u8>)> {
    let (lqr, pid) = std::thread::scope(|s| {
        let pid = s.spawn(|| run_simulation(exp, ControllerKind::Pid));
        let lqr = run_simulation(exp, ControllerKind::Lqr);
        (lqr, pid.join().expect("PID simulation thread panicked"))
    });
    let report = CompareReport::new(lqr?.report, pid?.report);
    let json = output::to_json(&report)?;
    Ok((report, json))
}

/// Writes `compare.json` to the output directory and returns the same JSON.
pub fn compare_cmd(exp: &Experiment) -> Result<String> {
    let (_, json) = compare(exp)?;
    let path = exp.output.dir.join("compare.json");
    output::write_file(&path, &json)?;
    Ok(String::from_utf8_lossy(&json).into_owned())
}
