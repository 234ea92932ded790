//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#![allow(clippy::approx_constant)]

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use armlqr::commands::ik_rad;
use armlqr::config::{self, ControllerKind, Overrides};
use armlqr_core::control::{lqr_gain, solve_are, LqrWeights, PidGains};
use armlqr_core::dynamics::{paper, PlantModel};
use armlqr_core::kinematics::{forward_kinematics, inverse_kinematics};
use armlqr_core::linearize::linearize_about;
use armlqr_core::sim::{rk4_step, simulate, Controller, OpenLoopTorque, SimConfig};
use armlqr_core::{default_params, JointState, ManipulatorParams, TorqueCommand};
use nalgebra::{DMatrix, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TABLE_IV_START: [f64; 3] = [0.7854, -1.6280, 1.6264];
const TABLE_IV_GOAL: [f64; 3] = [1.0304, -0.3373, 0.3349];
const IK_TOL: f64 = 1e-3;
const IK_RUNTIME: Duration = Duration::from_millis(1);
const ROUNDTRIP_SAMPLES: usize = 1000;
const ROUNDTRIP_ANGLE_TOL: f64 = 1e-6;
const ROUNDTRIP_POINT_TOL: f64 = 1e-9;
const ORACLE_SAMPLES: usize = 100;
const ORACLE_REL_TOL: f64 = 1e-12;
const ARE_ORACLE_TOL: f64 = 1e-6;
const ARE_RESIDUAL_TOL: f64 = 1e-8;
const POSITION_GAIN: f64 = 100.0;
const POSITION_GAIN_TOL: f64 = 5.0;
const SETTLE_12: (f64, f64) = (1.2, 0.5);
const SETTLE_3: (f64, f64) = (1.5, 0.5);
const MAX_OVERSHOOT_PCT: f64 = 0.5;
const MAX_SSE: f64 = 1e-3;
const SIM_RUNTIME: Duration = Duration::from_secs(5);
const PID_MIN_OVERSHOOT_PCT: f64 = 1.0;
const RK4_ORDER: (f64, f64) = (4.0, 0.3);
const EQUILIBRIUM_TOL: f64 = 1e-9;

fn config_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/table_iv.toml")
}

fn table_iv() -> config::Experiment {
    config::load(&config_path(), &Overrides::default()).expect("reference config loads")
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

fn ik_reproduction() -> Outcome {
    let p = default_params();
    let cases = [
        ([10.0, 10.0, 10.0], TABLE_IV_START),
        ([15.0, 25.0, 20.0], TABLE_IV_GOAL),
    ];
    let mut worst_err = 0.0f64;
    let mut worst_time = Duration::ZERO;
    for (point, expected) in cases {
        let t0 = Instant::now();
        let theta = ik_rad(&p, point).expect("Table IV point is reachable");
        worst_time = worst_time.max(t0.elapsed());
        worst_err = worst_err.max(max_abs_diff(&theta, &expected));
    }
    // The binary prints the same angles at four decimals.
    let out = Command::new(env!("CARGO_BIN_EXE_armlqr"))
        .args(["ik", "10", "10", "10"])
        .output()
        .unwrap();
    let printed = String::from_utf8_lossy(&out.stdout).trim().to_string();
    let cli_ok = out.status.success() && printed == "0.7854 -1.6280 1.6264";
    outcome(
        worst_err < IK_TOL && worst_time < IK_RUNTIME && cli_ok,
        format!("max error {worst_err:.2e} rad, slowest {worst_time:?}, cli prints `{printed}`"),
    )
}

fn fk_ik_roundtrip() -> Outcome {
    let p = default_params();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut n, mut angle_err, mut point_err) = (0, 0.0f64, 0.0f64);
    while n < ROUNDTRIP_SAMPLES {
        let th = Vector3::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-1.4..1.4),
            rng.random_range(0.05..PI - 0.05),
        );
        // The wrist must sit in front of the base axis for the returned branch.
        if p.a3 * (th[1] + th[2]).cos() + p.a2 * th[1].cos() <= 1e-3 {
            continue;
        }
        n += 1;
        let tip = forward_kinematics(&p, &th).end_effector;
        let back = inverse_kinematics(&p, &tip).expect("sampled target is reachable");
        for i in 0..3 {
            angle_err = angle_err.max(wrap(back[i] - th[i]).abs());
        }
        point_err = point_err.max((forward_kinematics(&p, &back).end_effector - tip).norm());
    }
    outcome(
        angle_err < ROUNDTRIP_ANGLE_TOL && point_err < ROUNDTRIP_POINT_TOL,
        format!("{n} targets, max angle error {angle_err:.2e} rad, max point error {point_err:.2e} m"),
    )
}

/// One additive term of a published closed-form expression: a coefficient
/// times a product of trigonometric factors and joint-rate factors.
struct Term {
    coef: f64,
    trig: fn(&[f64; 3]) -> f64,
    rates: &'static [usize],
}

type Expr = Vec<Term>;
type TermTables = ([[Expr; 3]; 3], [Expr; 3], [Expr; 3]);
type Criterion = (&'static str, fn() -> Outcome);

fn sum_terms(terms: &[Term], th: &[f64; 3], w: &[f64; 3]) -> (f64, f64) {
    let mut value = 0.0;
    let mut magnitude = 0.0;
    for t in terms {
        let v = t.coef * (t.trig)(th) * t.rates.iter().map(|&i| w[i]).product::<f64>();
        value += v;
        magnitude += v.abs();
    }
    (value, magnitude)
}

fn one(_: &[f64; 3]) -> f64 {
    1.0
}

/// Term tables for the published inertia, velocity-coupling and gravity
/// expressions, transcribed one bracket at a time.
fn published_terms(p: &ManipulatorParams) -> TermTables {
    let ManipulatorParams {
        a1,
        a2,
        a3,
        m1,
        m2,
        m3,
        g,
        ..
    } = *p;
    let t = |coef: f64, trig: fn(&[f64; 3]) -> f64, rates: &'static [usize]| Term { coef, trig, rates };
    let c2 = |th: &[f64; 3]| th[1].cos();
    let c3 = |th: &[f64; 3]| th[2].cos();
    let s3 = |th: &[f64; 3]| th[2].sin();
    let c23 = |th: &[f64; 3]| (th[1] + th[2]).cos();
    let c2sq = |th: &[f64; 3]| th[1].cos().powi(2);
    let c23sq = |th: &[f64; 3]| (th[1] + th[2]).cos().powi(2);
    let c23c2 = |th: &[f64; 3]| (th[1] + th[2]).cos() * th[1].cos();
    let s2x2 = |th: &[f64; 3]| (2.0 * th[1]).sin();
    let s23x2 = |th: &[f64; 3]| (2.0 * (th[1] + th[2])).sin();
    let s2x2p3 = |th: &[f64; 3]| (2.0 * th[1] + th[2]).sin();
    let c2s23 = |th: &[f64; 3]| th[1].cos() * (th[1] + th[2]).sin();

    let m11 = vec![
        t(m1 * a1 * a1 / 2.0, one, &[]),
        t(m1 * a2 * a2 / 2.0, one, &[]),
        t(m3 * a2 * a2, c2sq, &[]),
        t(m3 * a3 * a3 / 3.0, c23sq, &[]),
        t(m3 * a2 * a3, c23c2, &[]),
        t(m2 * a2 * a2 / 3.0, c2sq, &[]),
    ];
    let m22 = vec![
        t(a2 * a2 * m2 / 3.0, one, &[]),
        t(a2 * a2 * m3, one, &[]),
        t(a3 * a3 * m3 / 3.0, one, &[]),
        t(a2 * a3 * m3, c3, &[]),
    ];
    let m23 = || {
        vec![
            t(a3 * a3 * m3 / 3.0, one, &[]),
            t(a2 * a2 * m3, one, &[]),
            t(a2 * a3 * m3 / 3.0, c3, &[]),
        ]
    };
    let m33 = vec![t(m3 * a3 * a3 / 3.0, one, &[])];
    let inertia = [[m11, vec![], vec![]], [vec![], m22, m23()], [vec![], m23(), m33]];

    let v1 = vec![
        t(-4.0 / 3.0 * m2 * a2 * a2, s2x2, &[0, 1]),
        t(-m3 * a3 * a3 / 3.0, s23x2, &[0, 1]),
        t(-m3 * a2 * a3, s2x2p3, &[0, 1]),
        t(-m3 * a3 * a3 / 3.0, s23x2, &[0, 2]),
        t(-m3 * a2 * a3, c2s23, &[0, 2]),
    ];
    let v2 = vec![
        t(-m3 * a2 * a3, s3, &[1, 2]),
        t(-m3 * a2 * a3 / 2.0, s3, &[2, 2]),
        t(m2 * a2 * a2 / 6.0, s2x2, &[0, 0]),
        t(m3 * a3 * a3 / 6.0, s23x2, &[0, 0]),
        t(m3 * a2 * a2 / 2.0, s2x2, &[0, 0]),
        t(m3 * a2 * a3 / 2.0, s2x2p3, &[0, 0]),
    ];
    let v3 = vec![
        t(m3 * a2 * a3 / 2.0, s3, &[1, 1]),
        t(m3 * a3 * a3 / 6.0, s23x2, &[0, 0]),
        t(m3 * a2 * a3 / 2.0, c2s23, &[0, 0]),
    ];

    let gravity = [
        vec![],
        vec![
            t(m3 * g * a3 / 2.0, c23, &[]),
            t(m2 * g * a2 / 2.0, c2, &[]),
            t(m3 * g * a2, c2, &[]),
        ],
        vec![t(m3 * g * a3 / 2.0, c23, &[])],
    ];
    (inertia, [v1, v2, v3], gravity)
}

fn dynamics_oracle() -> Outcome {
    let p = default_params();
    let (m_terms, v_terms, g_terms) = published_terms(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..ORACLE_SAMPLES {
        let th: [f64; 3] = std::array::from_fn(|_| rng.random_range(-PI..PI));
        let w: [f64; 3] = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
        let (tv, wv) = (Vector3::from(th), Vector3::from(w));
        let m = paper::inertia_matrix(&p, &tv);
        let v = paper::velocity_vector(&p, &tv, &wv);
        let gv = paper::gravity_vector(&p, &tv);
        let mut check = |got: f64, terms: &[Term]| {
            let (want, magnitude) = sum_terms(terms, &th, &w);
            let rel = (got - want).abs() / magnitude.max(f64::MIN_POSITIVE);
            worst = worst.max(if magnitude == 0.0 { got.abs() } else { rel });
        };
        for i in 0..3 {
            for j in 0..3 {
                check(m[(i, j)], &m_terms[i][j]);
            }
            check(v[i], &v_terms[i]);
            check(gv[i], &g_terms[i]);
        }
    }
    outcome(
        worst <= ORACLE_REL_TOL,
        format!("{ORACLE_SAMPLES} states, worst relative deviation {worst:.2e}"),
    )
}

fn are_gain(a: DMatrix<f64>, b: DMatrix<f64>, q: DMatrix<f64>, r: DMatrix<f64>) -> DMatrix<f64> {
    let s = solve_are(&a, &b, &q, &r).expect("oracle ARE is solvable");
    r.try_inverse().unwrap() * b.transpose() * s
}

fn are_correctness() -> Outcome {
    // Scalar a = b = q = r = 1: S = K = 1 + √2.
    let k_scalar = are_gain(
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, 1.0),
    );
    let scalar_err = (k_scalar[(0, 0)] - (1.0 + 2f64.sqrt())).abs();

    // Double integrator: K = [√q1, √(q2 + 2√q1)] for R = 1.
    let (q1, q2) = (10000.0, 800.0);
    let k_di = are_gain(
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
        DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![q1, q2])),
        DMatrix::identity(1, 1),
    );
    let di_expected = [q1.sqrt(), (q2 + 2.0 * q1.sqrt()).sqrt()];
    let di_err = max_abs_diff(k_di.as_slice(), &di_expected);

    let exp = table_iv();
    let model = linearize_about(exp.plant(), &exp.params, &exp.goal().unwrap().theta).unwrap();
    let gain = lqr_gain(&model, &exp.weights).unwrap();
    let abscissa = gain.spectral_abscissa();
    outcome(
        scalar_err < ARE_ORACLE_TOL && di_err < ARE_ORACLE_TOL && gain.residual < ARE_RESIDUAL_TOL && abscissa < 0.0,
        format!(
            "scalar error {scalar_err:.1e}, double integrator K = [{:.4}, {:.4}] (error {di_err:.1e}), manipulator residual {:.1e}, spectral abscissa {abscissa:.4}",
            k_di[(0, 0)],
            k_di[(0, 1)],
            gain.residual
        ),
    )
}

fn paper_gain_reference() -> Outcome {
    let exp = table_iv();
    let model = linearize_about(exp.plant(), &exp.params, &exp.goal().unwrap().theta).unwrap();
    let k = lqr_gain(&model, &LqrWeights::reference()).unwrap().k;
    let block = k.fixed_view::<3, 3>(0, 0);
    let diag_ok = (0..3).all(|i| (block[(i, i)] - POSITION_GAIN).abs() <= POSITION_GAIN_TOL);
    let dominant =
        (0..3).all(|i| block[(i, i)].abs() > (0..3).filter(|&j| j != i).map(|j| block[(i, j)].abs()).sum::<f64>());
    outcome(
        diag_ok && dominant,
        format!(
            "position block diagonal ({:.3}, {:.3}, {:.3}), diagonally dominant: {dominant}",
            block[(0, 0)],
            block[(1, 1)],
            block[(2, 2)]
        ),
    )
}

fn within(v: f64, (centre, tol): (f64, f64)) -> bool {
    (v - centre).abs() <= tol
}

fn lqr_point_to_point() -> Outcome {
    let exp = table_iv();
    let cfg = exp.sim_config(ControllerKind::Lqr).unwrap();
    let t0 = Instant::now();
    let result = simulate(&exp.params, &cfg).unwrap();
    let elapsed = t0.elapsed();
    let m = result.metrics;
    let windows = [SETTLE_12, SETTLE_12, SETTLE_3];
    let settle_ok = (0..3).all(|j| m.settled[j] && within(m.settling_time[j], windows[j]));
    let overshoot_ok = m.overshoot_pct.iter().all(|&o| o <= MAX_OVERSHOOT_PCT);
    let sse_ok = m.steady_state_error.iter().all(|&e| e < MAX_SSE);
    outcome(
        settle_ok && overshoot_ok && sse_ok && elapsed < SIM_RUNTIME,
        format!(
            "settling {:.3}/{:.3}/{:.3} s (windows 1.2±0.5, 1.2±0.5, 1.5±0.5), overshoot {:.3}/{:.3}/{:.3} %, SSE max {:.1e} rad, runtime {elapsed:.2?}",
            m.settling_time[0],
            m.settling_time[1],
            m.settling_time[2],
            m.overshoot_pct[0],
            m.overshoot_pct[1],
            m.overshoot_pct[2],
            m.steady_state_error.iter().fold(0.0f64, |a, &b| a.max(b)),
        ),
    )
}

fn lqr_vs_pid() -> Outcome {
    let exp = table_iv();
    let mut cfg = exp.sim_config(ControllerKind::Lqr).unwrap();
    let lqr = simulate(&exp.params, &cfg).unwrap().metrics;
    cfg.controller = Controller::Pid(PidGains::default());
    let pid = simulate(&exp.params, &cfg).unwrap().metrics;
    let slower = (0..3).all(|j| !pid.settled[j] || pid.settling_time[j] > lqr.settling_time[j]);
    let overshoots = pid.overshoot_pct.iter().any(|&o| o > PID_MIN_OVERSHOOT_PCT);
    let faster_peaks = (0..3).all(|j| pid.peak_velocity[j] > lqr.peak_velocity[j]);
    let f3 = |v: [f64; 3], d: usize| format!("{:.d$}/{:.d$}/{:.d$}", v[0], v[1], v[2]);
    outcome(
        slower && overshoots && faster_peaks,
        format!(
            "settling PID {} vs LQR {} s, PID overshoot {} %, peak |ω| PID {} vs LQR {} rad/s",
            f3(pid.settling_time, 3),
            f3(lqr.settling_time, 3),
            f3(pid.overshoot_pct, 1),
            f3(pid.peak_velocity, 2),
            f3(lqr.peak_velocity, 2),
        ),
    )
}

fn integrate(p: &ManipulatorParams, x0: JointState, dt: f64, horizon: f64) -> JointState {
    let steps = (horizon / dt).round() as usize;
    (0..steps).fold(x0, |x, _| {
        rk4_step(PlantModel::SlenderRod, p, &x, &TorqueCommand::zero(), dt).unwrap()
    })
}

fn rk4_order() -> Outcome {
    let p = default_params();
    // Torque-free swing about the hanging pose with some base rotation. Larger
    // swings whip the light distal links past 60 rad/s, where 1 ms steps are
    // not yet in the asymptotic error regime.
    let x0 = JointState::new(Vector3::new(0.0, -1.4, 0.1), Vector3::new(0.3, 0.0, 0.0));
    let horizon = 1.0;
    let reference = integrate(&p, x0, 1e-6, horizon).to_vector();
    let err = |dt: f64| (integrate(&p, x0, dt, horizon).to_vector() - reference).amax();
    let (e1, e2) = (err(1e-3), err(5e-4));
    let order = (e1 / e2).log2();
    outcome(
        within(order, RK4_ORDER),
        format!("error {e1:.3e} at 1e-3 s, {e2:.3e} at 5e-4 s, order {order:.3}"),
    )
}

fn equilibrium_fixed_point() -> Outcome {
    let p = default_params();
    let upright = JointState::at_rest(Vector3::new(0.0, FRAC_PI_2, 0.0));
    let mut details = Vec::new();
    let mut pass = true;
    for plant in [PlantModel::SlenderRod, PlantModel::Paper] {
        let mut cfg = SimConfig::new(
            upright,
            upright,
            Controller::OpenLoop(OpenLoopTorque::Constant(TorqueCommand::zero())),
        );
        cfg.duration = 1.0;
        cfg.plant = plant;
        let result = simulate(&p, &cfg).unwrap();
        let drift = result
            .states
            .iter()
            .map(|s| (s.theta - upright.theta).amax())
            .fold(0.0, f64::max);
        pass &= drift < EQUILIBRIUM_TOL;
        details.push(format!("{} drift {drift:.2e} rad", plant.name()));
    }
    outcome(pass, details.join(", "))
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut files = Vec::new();
    for dir in &dirs {
        let status = Command::new(env!("CARGO_BIN_EXE_armlqr"))
            .arg("simulate")
            .arg("--config")
            .arg(config_path())
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap()
            .status;
        assert!(status.success(), "simulate failed");
        let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
        files.push((read("trajectory.csv"), read("metrics.json")));
    }
    let csv_same = files[0].0 == files[1].0;
    let json_same = files[0].1 == files[1].1;
    outcome(
        csv_same && json_same,
        format!(
            "CSV identical: {csv_same} ({} bytes), JSON identical: {json_same}",
            files[0].0.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("IK reproduction", ik_reproduction),
        ("FK/IK roundtrip", fk_ik_roundtrip),
        ("dynamics oracle equivalence", dynamics_oracle),
        ("ARE correctness", are_correctness),
        ("paper gain reference", paper_gain_reference),
        ("LQR point-to-point", lqr_point_to_point),
        ("LQR vs PID contrast", lqr_vs_pid),
        ("RK4 order", rk4_order),
        ("equilibrium fixed point", equilibrium_fixed_point),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status} {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
