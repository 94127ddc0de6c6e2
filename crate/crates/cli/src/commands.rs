use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pursuit_core::{ControllerConfig, Variant};
use pursuit_sim::{
    generate_scenario, resolve_configs, run_scenario, MetricsReport, Scenario, ScenarioKind, SimConfig, TrajectoryLog,
};
use rayon::prelude::*;

use crate::manifest::RunManifest;
use crate::plot::render_svg;
use crate::report::{comparison_table, speed_near_obstacles, sweep_csv, Column, SweepRow};

pub const RUN_OUTPUTS: [&str; 3] = ["trajectory.csv", "metrics.txt", "plot.svg"];
pub const THREADS_ENV: &str = "PURSUIT_LAB_THREADS";

/// How a command that ran to completion should exit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    ScenarioFailed,
}

/// A loaded scenario plus the user's `--config` tables.
pub struct Setup {
    scenario: Scenario,
    config_file: Option<PathBuf>,
    controller: toml::Table,
    sim: toml::Table,
}

impl Setup {
    pub fn load(scenario: &Path, config: Option<&Path>) -> Result<Self> {
        let scenario = Scenario::load(scenario)?;
        let (controller, sim) = match config {
            Some(file) => read_config(file)?,
            None => Default::default(),
        };
        Ok(Self {
            scenario,
            config_file: config.map(Path::to_path_buf),
            controller,
            sim,
        })
    }

    /// Defaults, then the scenario's overrides, then the `--config` file.
    pub fn resolve(&self, variant: Variant) -> Result<(ControllerConfig<f64>, SimConfig)> {
        let (cfg, sim) = resolve_configs(&self.scenario, &ControllerConfig::default(), &SimConfig::default())?;
        let cfg = cfg.with_overrides(&self.controller).map_err(|e| self.config_error(e))?;
        let sim = sim.with_overrides(&self.sim).map_err(|e| self.config_error(e))?;
        Ok((cfg.with_variant(variant), sim))
    }

    fn config_error(&self, e: impl std::fmt::Display) -> anyhow::Error {
        match &self.config_file {
            Some(file) => anyhow::anyhow!("{}: {e}", file.display()),
            None => anyhow::anyhow!("{e}"),
        }
    }

    fn manifest(&self, command: Vec<String>) -> Result<RunManifest> {
        let mut m = RunManifest::new(command);
        for input in self.scenario.inputs.iter().chain(&self.config_file) {
            m.add_input(input)?;
        }
        Ok(m)
    }
}

/// Reads the `[controller]` and `[sim]` tables of a config file.
fn read_config(file: &Path) -> Result<(toml::Table, toml::Table)> {
    let text = fs::read_to_string(file).with_context(|| file.display().to_string())?;
    let mut doc: toml::Table = toml::from_str(&text).with_context(|| file.display().to_string())?;
    let mut take = |name: &str| -> Result<toml::Table> {
        match doc.remove(name) {
            None => Ok(toml::Table::new()),
            Some(toml::Value::Table(t)) => Ok(t),
            Some(_) => bail!("{}: `{name}` must be a table", file.display()),
        }
    };
    let controller = take("controller")?;
    let sim = take("sim")?;
    if let Some(key) = doc.keys().next() {
        bail!(
            "{}: unknown key `{key}`; expected [controller] and [sim]",
            file.display()
        );
    }
    Ok((controller, sim))
}

/// Result of one simulated run whose artifacts have been written.
enum RunOutput {
    Finished(MetricsReport),
    Errored(String),
}

/// Runs one configuration and writes trajectory, metrics and plot into
/// `dir`. A run that cannot start still writes all three files, with the
/// error in the metrics.
fn run_into(scenario: &Scenario, cfg: &ControllerConfig<f64>, sim: &SimConfig, dir: &Path) -> Result<RunOutput> {
    fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
    let (log, metrics_text, output) = match run_scenario(scenario, cfg, sim) {
        Ok(result) => {
            let text = result.metrics.to_text();
            (result.log, text, RunOutput::Finished(result.metrics))
        }
        Err(e) => {
            let msg = e.to_string();
            let text = format!("error = {}\nsuccess = false\n", toml::Value::String(msg.clone()));
            (TrajectoryLog::default(), text, RunOutput::Errored(msg))
        }
    };
    let header = format!(
        "scenario = {}\nvariant = {}\n",
        toml::Value::String(scenario.name.clone()),
        toml::Value::String(cfg.variant.to_string())
    );
    write(&dir.join("trajectory.csv"), &log.to_csv_string())?;
    write(&dir.join("metrics.txt"), &(header + &metrics_text))?;
    write(&dir.join("plot.svg"), &render_svg(scenario, &log, cfg.v_max))?;
    Ok(output)
}

fn write(file: &Path, contents: &str) -> Result<()> {
    fs::write(file, contents).with_context(|| file.display().to_string())
}

/// Worker pool capped by `PURSUIT_LAB_THREADS`; rayon's default otherwise.
fn pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => bail!("{THREADS_ENV} must be a positive integer, got `{v}`"),
        },
        Err(_) => 0,
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn summary(label: &str, m: &MetricsReport) -> String {
    format!(
        "{label}: {} after {:.2} s, {:.3} m traveled, mean path error {:.4} m, {} collisions",
        m.outcome.as_str(),
        m.time,
        m.distance_traveled,
        m.average_distance_to_path,
        m.collisions
    )
}

pub fn run(
    command: Vec<String>,
    scenario: &Path,
    variant: Variant,
    config: Option<&Path>,
    out: &Path,
) -> Result<Status> {
    let setup = Setup::load(scenario, config)?;
    let (cfg, sim) = setup.resolve(variant)?;
    let mut manifest = setup.manifest(command)?;
    RUN_OUTPUTS.iter().for_each(|f| manifest.add_output(*f));
    manifest.add_run(variant.as_str(), &cfg, &sim);
    manifest.write(out)?;
    match run_into(&setup.scenario, &cfg, &sim, out)? {
        RunOutput::Finished(m) => {
            println!("{}", summary(variant.as_str(), &m));
            Ok(if m.success {
                Status::Success
            } else {
                Status::ScenarioFailed
            })
        }
        RunOutput::Errored(msg) => bail!(msg),
    }
}

pub fn compare(command: Vec<String>, scenario: &Path, config: Option<&Path>, out: &Path) -> Result<Status> {
    let setup = Setup::load(scenario, config)?;
    let resolved = Variant::ALL
        .into_iter()
        .map(|v| setup.resolve(v))
        .collect::<Result<Vec<_>>>()?;
    let mut manifest = setup.manifest(command)?;
    manifest.add_output("comparison.txt");
    for (variant, (cfg, sim)) in Variant::ALL.into_iter().zip(&resolved) {
        RUN_OUTPUTS
            .iter()
            .for_each(|f| manifest.add_output(format!("{variant}/{f}")));
        manifest.add_run(variant.as_str(), cfg, sim);
    }
    manifest.write(out)?;

    let outputs = pool()?.install(|| {
        Variant::ALL
            .par_iter()
            .zip(&resolved)
            .map(|(variant, (cfg, sim))| run_into(&setup.scenario, cfg, sim, &out.join(variant.as_str())))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut any_success = false;
    let columns: Vec<Column<'_>> = Variant::ALL
        .iter()
        .zip(&outputs)
        .map(|(variant, output)| match output {
            RunOutput::Finished(m) => {
                any_success |= m.success;
                println!("{}", summary(variant.as_str(), m));
                Column {
                    name: variant.as_str(),
                    metrics: Some(m),
                }
            }
            RunOutput::Errored(msg) => {
                eprintln!("{variant}: {msg}");
                Column {
                    name: variant.as_str(),
                    metrics: None,
                }
            }
        })
        .collect();
    let table = comparison_table(&columns);
    write(&out.join("comparison.txt"), &table)?;
    print!("{table}");
    Ok(if any_success {
        Status::Success
    } else {
        Status::ScenarioFailed
    })
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    command: Vec<String>,
    scenario: &Path,
    param: &str,
    values: &[f64],
    variant: Variant,
    config: Option<&Path>,
    out: &Path,
) -> Result<Status> {
    if !ControllerConfig::<f64>::PARAM_NAMES.contains(&param) {
        bail!(
            "unknown parameter `{param}`; valid names: {}",
            ControllerConfig::<f64>::PARAM_NAMES.join(", ")
        );
    }
    let setup = Setup::load(scenario, config)?;
    let (base, sim) = setup.resolve(variant)?;
    let configs = values
        .iter()
        .map(|&value| {
            let mut cfg = base.clone();
            cfg.set_param(param, value)
                .with_context(|| format!("{param} = {value}"))?;
            Ok(cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut manifest = setup.manifest(command)?;
    manifest.add_output("sweep.csv");
    for (value, cfg) in values.iter().zip(&configs) {
        manifest.add_run(format!("{param}={value}"), cfg, &sim);
    }
    manifest.write(out)?;

    let results = pool()?.install(|| {
        configs
            .par_iter()
            .map(|cfg| run_scenario(&setup.scenario, cfg, &sim))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let rows: Vec<SweepRow> = values
        .iter()
        .zip(&configs)
        .zip(results)
        .map(|((&value, cfg), r)| SweepRow {
            value,
            speed_near_obstacles: speed_near_obstacles(&r.log, cfg.d_prox),
            metrics: r.metrics,
        })
        .collect();
    let csv = sweep_csv(&rows);
    write(&out.join("sweep.csv"), &csv)?;
    for row in &rows {
        println!("{}", summary(&format!("{param}={}", row.value), &row.metrics));
    }
    Ok(if rows.iter().any(|r| r.metrics.success) {
        Status::Success
    } else {
        Status::ScenarioFailed
    })
}

/// Parses `key=value` pairs, reading each value as a TOML value.
pub fn parse_assignments(pairs: &[String]) -> Result<toml::Table> {
    let mut table = toml::Table::new();
    for pair in pairs {
        let Some((key, value)) = pair.split_once('=') else {
            bail!("expected key=value, got `{pair}`");
        };
        let doc: toml::Table =
            toml::from_str(&format!("v = {value}")).with_context(|| format!("value of `{}`", key.trim()))?;
        table.insert(key.trim().to_string(), doc["v"].clone());
    }
    Ok(table)
}

pub fn generate(command: Vec<String>, kind: ScenarioKind, assignments: &[String], out: &Path) -> Result<Status> {
    let params = parse_assignments(assignments)?;
    let scenario = generate_scenario(kind, &params)?;
    let mut manifest = RunManifest::new(command);
    for f in ["scenario.toml", "grid.txt", "path.csv"] {
        manifest.add_output(f);
    }
    manifest.params = Some(params);
    manifest.write(out)?;
    let file = scenario.write_to_dir(out, Some(kind.as_str()))?;
    println!("{}", file.display());
    Ok(Status::Success)
}
