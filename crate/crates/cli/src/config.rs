//! Experiment configuration file (TOML). Lengths are given in centimetres and
//! masses in kilograms, as in the reference tables; everything is converted to
//! SI on load. See `docs/config-schema.md`.

use std::path::{Path, PathBuf};

use armlqr_core::control::{LqrWeights, PidGains};
use armlqr_core::dynamics::PlantModel;
use armlqr_core::kinematics::{inverse_kinematics, Point3};
use armlqr_core::sim::{Controller, OpenLoopTorque, SimConfig, DEFAULT_BAND, DEFAULT_SUBSTEPS};
use armlqr_core::{validate_params, JointState, ManipulatorParams, TorqueCommand};
use nalgebra::Vector3;
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const CM_PER_M: f64 = 100.0;

pub fn cm_to_m(v: f64) -> f64 {
    v / CM_PER_M
}

pub fn m_to_cm(v: f64) -> f64 {
    v * CM_PER_M
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    #[serde(default)]
    pub manipulator: ManipulatorSection,
    pub start: Option<EndpointSection>,
    pub goal: Option<EndpointSection>,
    #[serde(default)]
    pub controller: ControllerSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManipulatorSection {
    pub a1_cm: f64,
    pub a2_cm: f64,
    pub a3_cm: f64,
    pub total_mass_kg: f64,
    pub gravity: f64,
    /// Per-link masses; when absent the total is split in proportion to link length.
    pub link_masses_kg: Option<[f64; 3]>,
}

impl Default for ManipulatorSection {
    fn default() -> Self {
        let p = armlqr_core::default_params();
        Self {
            a1_cm: m_to_cm(p.a1),
            a2_cm: m_to_cm(p.a2),
            a3_cm: m_to_cm(p.a3),
            total_mass_kg: p.m_total,
            gravity: p.g,
            link_masses_kg: None,
        }
    }
}

/// An endpoint is a Cartesian point in cm or a joint configuration in rad,
/// never both.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointSection {
    pub cartesian_cm: Option<[f64; 3]>,
    pub joints_rad: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    #[default]
    Lqr,
    Pid,
    OpenLoop,
}

impl std::str::FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "lqr" => Ok(Self::Lqr),
            "pid" => Ok(Self::Pid),
            "open-loop" => Ok(Self::OpenLoop),
            other => Err(format!("unknown controller `{other}` (expected lqr, pid or open-loop)")),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    #[serde(default)]
    pub kind: ControllerKind,
    #[serde(default)]
    pub lqr: LqrSection,
    #[serde(default)]
    pub pid: PidSection,
    #[serde(default)]
    pub open_loop: OpenLoopSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LqrSection {
    pub q_diag: [f64; 6],
    pub r_diag: [f64; 3],
}

impl Default for LqrSection {
    fn default() -> Self {
        let w = LqrWeights::reference();
        Self {
            q_diag: core::array::from_fn(|i| w.q[(i, i)]),
            r_diag: core::array::from_fn(|i| w.r[(i, i)]),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidSection {
    pub kp: [f64; 3],
    pub ki: [f64; 3],
    pub kd: [f64; 3],
    pub integral_limit_nm: [f64; 3],
}

impl Default for PidSection {
    fn default() -> Self {
        let g = PidGains::default();
        Self {
            kp: g.kp.into(),
            ki: g.ki.into(),
            kd: g.kd.into(),
            integral_limit_nm: g.integral_limit.into(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenLoopSection {
    /// Constant torque in N·m; when absent the gravity torque at the start pose is held.
    pub torque_nm: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PlantKind {
    #[default]
    SlenderRod,
    Paper,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
    pub duration: f64,
    pub substeps: u32,
    pub plant: PlantKind,
    pub band: f64,
    pub torque_limit_nm: Option<[f64; 3]>,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            duration: 5.0,
            substeps: DEFAULT_SUBSTEPS,
            plant: PlantKind::default(),
            band: DEFAULT_BAND,
            torque_limit_nm: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub trajectory: String,
    pub metrics: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            trajectory: "trajectory.csv".into(),
            metrics: "metrics.json".into(),
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub controller: Option<ControllerKind>,
}

/// A validated experiment in SI units.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub params: ManipulatorParams,
    pub start: Option<JointState>,
    pub goal: Option<JointState>,
    pub controller: ControllerKind,
    pub weights: LqrWeights,
    pub pid: PidGains,
    pub open_loop: OpenLoopTorque,
    pub sim: SimSection,
    pub output: OutputSection,
}

impl Experiment {
    pub fn plant(&self) -> PlantModel {
        match self.sim.plant {
            PlantKind::SlenderRod => PlantModel::SlenderRod,
            PlantKind::Paper => PlantModel::Paper,
        }
    }

    pub fn start(&self) -> Result<JointState> {
        self.start
            .ok_or_else(|| CliError::Config("config has no [start] endpoint".into()))
    }

    pub fn goal(&self) -> Result<JointState> {
        self.goal
            .ok_or_else(|| CliError::Config("config has no [goal] endpoint".into()))
    }

    pub fn controller_for(&self, kind: ControllerKind) -> Controller {
        match kind {
            ControllerKind::Lqr => Controller::Lqr,
            ControllerKind::Pid => Controller::Pid(self.pid),
            ControllerKind::OpenLoop => Controller::OpenLoop(self.open_loop),
        }
    }

    pub fn sim_config(&self, kind: ControllerKind) -> Result<SimConfig> {
        let mut cfg = SimConfig::new(self.start()?, self.goal()?, self.controller_for(kind));
        cfg.dt = self.sim.dt;
        cfg.duration = self.sim.duration;
        cfg.substeps = self.sim.substeps;
        cfg.plant = self.plant();
        cfg.weights = self.weights;
        cfg.band = self.sim.band;
        cfg.torque_limit = self.sim.torque_limit_nm.map(Vector3::from);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn trajectory_path(&self) -> PathBuf {
        self.output.dir.join(&self.output.trajectory)
    }

    pub fn metrics_path(&self) -> PathBuf {
        self.output.dir.join(&self.output.metrics)
    }
}

pub fn read_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(format!("config: {}", e.message())))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
            file.schema_version
        )));
    }
    Ok(file)
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<Experiment> {
    resolve(read_config(path)?, overrides)
}

pub fn manipulator_params(m: &ManipulatorSection) -> Result<ManipulatorParams> {
    let (a1, a2, a3) = (cm_to_m(m.a1_cm), cm_to_m(m.a2_cm), cm_to_m(m.a3_cm));
    let p = match m.link_masses_kg {
        Some([m1, m2, m3]) => ManipulatorParams {
            a1,
            a2,
            a3,
            m1,
            m2,
            m3,
            g: m.gravity,
            m_total: m.total_mass_kg,
        },
        None => ManipulatorParams::with_proportional_masses(a1, a2, a3, m.total_mass_kg, m.gravity),
    };
    validate_params(&p)?;
    Ok(p)
}

fn endpoint(p: &ManipulatorParams, name: &str, e: &EndpointSection) -> Result<JointState> {
    let theta = match (e.cartesian_cm, e.joints_rad) {
        (Some(c), None) => {
            let target = Point3::new(cm_to_m(c[0]), cm_to_m(c[1]), cm_to_m(c[2]));
            if !target.coords.iter().all(|v| v.is_finite()) {
                return Err(CliError::Config(format!("[{name}] cartesian_cm must be finite")));
            }
            inverse_kinematics(p, &target)?
        }
        (None, Some(j)) => Vector3::from(j),
        (Some(_), Some(_)) => {
            return Err(CliError::Config(format!(
                "[{name}] sets both cartesian_cm and joints_rad"
            )));
        }
        (None, None) => {
            return Err(CliError::Config(format!("[{name}] needs cartesian_cm or joints_rad")));
        }
    };
    let state = JointState::at_rest(theta);
    state.validate()?;
    Ok(state)
}

pub fn resolve(file: ConfigFile, overrides: &Overrides) -> Result<Experiment> {
    let params = manipulator_params(&file.manipulator)?;
    let start = file.start.as_ref().map(|e| endpoint(&params, "start", e)).transpose()?;
    let goal = file.goal.as_ref().map(|e| endpoint(&params, "goal", e)).transpose()?;

    let lqr = &file.controller.lqr;
    let weights = LqrWeights::diagonal(lqr.q_diag, lqr.r_diag);
    weights.validate()?;

    let pid = &file.controller.pid;
    let pid = PidGains {
        kp: pid.kp.into(),
        ki: pid.ki.into(),
        kd: pid.kd.into(),
        integral_limit: pid.integral_limit_nm.into(),
    };
    pid.validate()?;

    let open_loop = match file.controller.open_loop.torque_nm {
        Some(t) => OpenLoopTorque::Constant(TorqueCommand::new(t.into())),
        None => OpenLoopTorque::GravityHold,
    };

    let mut sim = file.sim;
    if let Some(dt) = overrides.dt {
        sim.dt = dt;
    }
    if let Some(duration) = overrides.duration {
        sim.duration = duration;
    }
    let mut output = file.output;
    if let Some(dir) = &overrides.out {
        output.dir = dir.clone();
    }

    Ok(Experiment {
        params,
        start,
        goal,
        controller: overrides.controller.unwrap_or(file.controller.kind),
        weights,
        pid,
        open_loop,
        sim,
        output,
    })
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;

    const MINIMAL: &str = "schema_version = 1\n";

    fn with(extra: &str) -> Result<Experiment> {
        resolve(parse_config(&format!("{MINIMAL}{extra}"))?, &Overrides::default())
    }

    #[test]
    fn defaults_match_reference_arm() {
        let exp = with("").unwrap();
        let p = armlqr_core::default_params();
        assert!((exp.params.a1 - p.a1).abs() < 1e-15);
        assert!((exp.params.m3 - p.m3).abs() < 1e-15);
        assert_eq!(exp.controller, ControllerKind::Lqr);
        assert_eq!(exp.plant(), PlantModel::SlenderRod);
        assert_eq!(exp.weights, LqrWeights::reference());
        assert_eq!(exp.pid, PidGains::default());
        assert!(exp.start.is_none() && exp.goal.is_none());
    }

    #[test]
    fn endpoints_in_either_form() {
        let exp = with("[start]\ncartesian_cm = [10.0, 10.0, 10.0]\n[goal]\njoints_rad = [1.0, -0.3, 0.3]\n").unwrap();
        let start = exp.start.unwrap().theta;
        assert!((start - Vector3::new(0.7854, -1.6280, 1.6264)).amax() < 1e-3);
        assert_eq!(exp.goal.unwrap().theta, Vector3::new(1.0, -0.3, 0.3));
    }

    #[test]
    fn rejects_bad_endpoints() {
        let both = with("[goal]\ncartesian_cm = [15.0, 25.0, 20.0]\njoints_rad = [0.0, 0.0, 0.0]\n").unwrap_err();
        assert_eq!(both.exit_code(), 2);
        let neither = with("[goal]\n").unwrap_err();
        assert_eq!(neither.exit_code(), 2);
        let far = with("[goal]\ncartesian_cm = [100.0, 0.0, 0.0]\n").unwrap_err();
        assert_eq!(far.exit_code(), 3);
    }

    #[test]
    fn rejects_invalid_values() {
        for extra in [
            "[manipulator]\na1_cm = -1.0\na2_cm = 15.0\na3_cm = 15.0\ntotal_mass_kg = 2.5\ngravity = 9.81\n",
            "[manipulator]\na1_cm = 25.0\na2_cm = 15.0\na3_cm = 15.0\ntotal_mass_kg = 2.5\ngravity = 9.81\nlink_masses_kg = [1.0, 1.0, 1.0]\n",
            "[controller.lqr]\nq_diag = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0]\nr_diag = [1.0, 0.0, 1.0]\n",
            "[controller]\nkind = \"mpc\"\n",
            "unknown_key = 3\n",
        ] {
            let e = with(extra).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{extra}: {e}");
        }
        assert_eq!(parse_config("schema_version = 2\n").unwrap_err().exit_code(), 2);
        assert_eq!(parse_config("[sim]\ndt = 0.001\n").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn overrides_take_precedence() {
        let file = parse_config(
            "schema_version = 1\n[sim]\ndt = 0.002\nduration = 3.0\nsubsteps = 10\nplant = \"paper\"\nband = 0.02\n",
        )
        .unwrap();
        let o = Overrides {
            out: Some("elsewhere".into()),
            dt: Some(0.0005),
            duration: Some(1.0),
            controller: Some(ControllerKind::Pid),
        };
        let exp = resolve(file, &o).unwrap();
        assert_eq!(exp.sim.dt, 0.0005);
        assert_eq!(exp.sim.duration, 1.0);
        assert_eq!(exp.sim.substeps, 10);
        assert_eq!(exp.plant(), PlantModel::Paper);
        assert_eq!(exp.controller, ControllerKind::Pid);
        assert_eq!(exp.trajectory_path(), PathBuf::from("elsewhere/trajectory.csv"));
    }

    #[test]
    fn cm_roundtrip_is_lossless() {
        for v in [0.0, 1.0, 10.0, 15.0, 25.0, 33.3333, -12.75, 54.999999] {
            assert!((m_to_cm(cm_to_m(v)) - v).abs() < 1e-9);
        }
    }
}
