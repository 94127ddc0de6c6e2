//! The closed simulation loop.

use pursuit_core::{
    compute_distance_field, distance_to_obstacle, Controller, ControllerConfig, ControllerError, ControllerStatus,
};

use crate::kinematics::{step_kinematics, RobotState, SimConfig};
use crate::log::{TrajectoryLog, TrajectoryRecord};
use crate::metrics::{compute_metrics, MetricsReport, Outcome};
use crate::scenario::{segments_intersect, Scenario};
use crate::SimError;

/// How long an obstacle stop must hold, at rest, before the run ends.
pub const STOP_PERSISTENCE: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct RunResult {
    pub log: TrajectoryLog,
    pub metrics: MetricsReport,
}

/// Runs `scenario` to completion. `config` and `sim` are used as given;
/// scenario overrides are applied by the caller (see
/// [`resolve_configs`]).
pub fn run_scenario(
    scenario: &Scenario,
    config: &ControllerConfig<f64>,
    sim: &SimConfig,
) -> Result<RunResult, SimError> {
    sim.validate()?;
    check_path_start(scenario, config)?;
    let mut controller = Controller::new(config.clone())?;
    controller.set_path(scenario.path.clone());

    let mut grid = scenario.grid.clone();
    let mut field = compute_distance_field(&grid);
    let mut fired = vec![false; scenario.events.len()];
    let mut state = RobotState::at_rest(scenario.start);
    let mut log = TrajectoryLog::default();
    let mut stopped_since: Option<f64> = None;
    let max_steps = (sim.duration_limit / sim.dt).ceil() as usize;

    let outcome = 'run: {
        for step in 0.. {
            let t = step as f64 * sim.dt;
            let d_o = distance_to_obstacle(&field, &state.pose).unwrap_or(0.0);
            let output = match controller.compute_command(&state.pose, state.v, &field) {
                Ok(o) => o,
                Err(ControllerError::NoValidPath) => break 'run Outcome::NoValidPath,
                Err(e) => return Err(e.into()),
            };
            log.records.push(TrajectoryRecord {
                step,
                t,
                pose: state.pose,
                command: output.command,
                v: state.v,
                omega: state.omega,
                status: output.status,
                breakdown: output.breakdown,
                d_o,
                lookahead_point: output.lookahead_point,
                lookahead_distance: output.lookahead_distance,
                warnings: output.warnings.len(),
            });

            if d_o < config.robot_radius {
                break 'run Outcome::Collision;
            }
            match output.status {
                ControllerStatus::GoalReached if state.v == 0.0 => break 'run Outcome::GoalReached,
                ControllerStatus::StoppedImminentCollision => {
                    let since = *stopped_since.get_or_insert(t);
                    if state.v == 0.0 && t - since >= STOP_PERSISTENCE - 1e-9 {
                        break 'run Outcome::StoppedForObstacle;
                    }
                }
                _ => stopped_since = None,
            }
            if step >= max_steps {
                break 'run Outcome::Timeout;
            }

            let next = step_kinematics(&state, &output.command, sim.dt, sim.a_max, config.omega_max);
            let mut grid_changed = false;
            for (event, done) in scenario.events.iter().zip(fired.iter_mut()) {
                let (a, b) = event.trigger_points();
                if !*done && segments_intersect(&state.pose.position(), &next.pose.position(), &a, &b) {
                    *done = true;
                    let (r0, r1) = event.rect_points();
                    grid.fill_rect(&r0, &r1);
                    grid_changed = true;
                    log::info!("event fired at t = {:.2} s", t + sim.dt);
                }
            }
            if grid_changed {
                field = compute_distance_field(&grid);
            }
            state = next;
        }
        unreachable!("the step loop only exits through break")
    };

    let metrics = compute_metrics(&log, &scenario.path, config.robot_radius, outcome);
    Ok(RunResult { log, metrics })
}

/// Applies a scenario's `[controller]` and `[sim]` overrides over the given
/// bases.
pub fn resolve_configs(
    scenario: &Scenario,
    base: &ControllerConfig<f64>,
    sim: &SimConfig,
) -> Result<(ControllerConfig<f64>, SimConfig), SimError> {
    Ok((
        base.with_overrides(&scenario.controller)?,
        sim.with_overrides(&scenario.sim)?,
    ))
}

fn check_path_start(scenario: &Scenario, config: &ControllerConfig<f64>) -> Result<(), SimError> {
    let first = scenario.path.points()[0];
    let gap = (first.x - scenario.start.x).hypot(first.y - scenario.start.y);
    let reach = 2.0 * config.lookahead_max.max(config.fixed_lookahead);
    if gap > reach {
        return Err(SimError::InvalidScenario(format!(
            "path starts {gap:.3} m from the start pose, more than {reach:.3} m"
        )));
    }
    Ok(())
}
