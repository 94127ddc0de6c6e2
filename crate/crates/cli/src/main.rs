//! `pursuit-lab`: run, compare and sweep path tracking scenarios.
//!
//! Exit codes: 0 on success, 1 on usage, parse or input errors, 2 when the
//! experiment ran but failed (no run reached a successful outcome).

mod commands;
mod manifest;
mod plot;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pursuit_core::Variant;
use pursuit_sim::ScenarioKind;

use commands::Status;

#[derive(Parser)]
#[command(
    name = "pursuit-lab",
    version,
    about = "Path tracking experiments with PP, APP and RPP"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario with one controller variant.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        variant: VariantArg,
        /// TOML file with [controller] and [sim] tables.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run all three variants on one scenario and tabulate their metrics.
    Compare {
        scenario: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one scenario per value of a controller parameter.
    Sweep {
        scenario: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
        #[arg(long, default_value = "rpp")]
        variant: VariantArg,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a generated scenario (scenario.toml, grid.txt, path.csv).
    Generate {
        kind: KindArg,
        /// Generator parameter as key=value, value in TOML syntax.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Pp,
    App,
    Rpp,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Pp => Variant::Pp,
            VariantArg::App => Variant::App,
            VariantArg::Rpp => Variant::Rpp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    #[value(name = "step_path")]
    StepPath,
    #[value(name = "blind_corner")]
    BlindCorner,
    #[value(name = "slalom")]
    Slalom,
    #[value(name = "waypoint_route")]
    WaypointRoute,
}

impl From<KindArg> for ScenarioKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::StepPath => ScenarioKind::StepPath,
            KindArg::BlindCorner => ScenarioKind::BlindCorner,
            KindArg::Slalom => ScenarioKind::Slalom,
            KindArg::WaypointRoute => ScenarioKind::WaypointRoute,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let invoked: Vec<String> = std::iter::once("pursuit-lab".to_string())
        .chain(std::env::args().skip(1))
        .collect();
    let result = match cli.command {
        Command::Run {
            scenario,
            variant,
            config,
            out,
        } => commands::run(invoked, &scenario, variant.into(), config.as_deref(), &out),
        Command::Compare { scenario, config, out } => commands::compare(invoked, &scenario, config.as_deref(), &out),
        Command::Sweep {
            scenario,
            param,
            values,
            variant,
            config,
            out,
        } => commands::sweep(
            invoked,
            &scenario,
            &param,
            &values,
            variant.into(),
            config.as_deref(),
            &out,
        ),
        Command::Generate { kind, set, out } => commands::generate(invoked, kind.into(), &set, &out),
    };
    match result {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::ScenarioFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(1)
        }
    }
}

/// The error and its causes, skipping causes already spelled out by the
/// message above them.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = e.to_string();
    for cause in e.chain().skip(1) {
        let cause = cause.to_string();
        if !msg.contains(&cause) {
            msg = format!("{msg}: {cause}");
        }
    }
    msg
}
