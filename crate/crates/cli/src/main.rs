use std::path::PathBuf;
use std::process::ExitCode;

use armlqr::commands;
use armlqr::config::{self, ControllerKind, Overrides};
use armlqr::{CliError, Result};
use armlqr_core::default_params;
use clap::{Args, Parser, Subcommand};

/// Modeling, LQR synthesis and simulation for a 3-DoF articulated arm.
#[derive(Debug, Parser)]
#[command(name = "armlqr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// End-effector position (cm) for joint angles (rad).
    Fk {
        #[arg(allow_negative_numbers = true, num_args = 3, value_names = ["THETA1", "THETA2", "THETA3"])]
        theta: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Joint angles (rad) for an end-effector position (cm).
    Ik {
        #[arg(allow_negative_numbers = true, num_args = 3, value_names = ["X", "Y", "Z"])]
        point: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// LQR gain, Riccati solution and closed-loop poles at the goal pose.
    Gain(Common),
    /// Closed-loop simulation; writes a trajectory CSV and a metrics JSON.
    Simulate(Common),
    /// LQR and PID on the same experiment, side by side.
    Compare(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Output sample period in seconds.
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated time in seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// lqr, pid or open-loop.
    #[arg(long)]
    controller: Option<ControllerKind>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            dt: self.dt,
            duration: self.duration,
            controller: self.controller,
        }
    }

    fn experiment(&self) -> Result<config::Experiment> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Config("--config <PATH> is required".into()))?;
        config::load(path, &self.overrides())
    }

    fn params(&self) -> Result<armlqr_core::ManipulatorParams> {
        match &self.config {
            Some(path) => config::manipulator_params(&config::read_config(path)?.manipulator),
            None => Ok(default_params()),
        }
    }
}

fn triple(v: &[f64]) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Fk { theta, common } => Ok(commands::fk(&common.params()?, triple(&theta))),
        Command::Ik { point, common } => commands::ik(&common.params()?, triple(&point)),
        Command::Gain(common) => {
            let outcome = commands::gain(&common.experiment()?, common.out.is_some())?;
            Ok(outcome.text)
        }
        Command::Simulate(common) => commands::simulate_cmd(&common.experiment()?),
        Command::Compare(common) => commands::compare_cmd(&common.experiment()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("error[validation]: {first}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
