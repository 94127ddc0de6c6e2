//! The tracking control law shared by Pure Pursuit, Adaptive Pure Pursuit
//! and Regulated Pure Pursuit.
//!
//! Each cycle runs, in order: goal check, closest point and pruning, local
//! window, lookahead, cusp handling, curvature, speed regulation (regulated
//! variant only), goal slowdown and speed floor, angular velocity, and
//! finally the collision check on the resulting command.

use serde::Serialize;
use thiserror::Error;

use crate::collision::{
    check_collision, distance_to_obstacle, project_arc, rolling_window_guard, DistanceField, RollingWindowWarning,
};
use crate::config::{ConfigError, ControllerConfig, Variant};
use crate::geometry::{normalize_angle, PathPoint, Pose2D, VelocityCommand};
use crate::path::{
    build_local_view, detect_cusp, find_closest_index, lookahead_distance, select_lookahead_point, LocalPathView, Path,
    PathError,
};
use crate::Scalar;

/// Lookahead points closer than this to the robot give no usable curvature.
pub const DEGENERATE_LOOKAHEAD: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ControllerError {
    #[error("no valid path to track")]
    NoValidPath,
    #[error("lookahead point coincides with the robot")]
    DegenerateLookahead,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Path(#[from] PathError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ControllerStatus {
    Tracking,
    ReverseTracking,
    RotatingToHeading,
    RotatingToGoal,
    GoalReached,
    StoppedImminentCollision,
    NoValidPath,
}

impl ControllerStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControllerStatus::Tracking => "Tracking",
            ControllerStatus::ReverseTracking => "ReverseTracking",
            ControllerStatus::RotatingToHeading => "RotatingToHeading",
            ControllerStatus::RotatingToGoal => "RotatingToGoal",
            ControllerStatus::GoalReached => "GoalReached",
            ControllerStatus::StoppedImminentCollision => "StoppedImminentCollision",
            ControllerStatus::NoValidPath => "NoValidPath",
        }
    }
}

/// Intermediate speeds of one cycle, logged for offline analysis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(bound = "S: Scalar")]
pub struct RegulationBreakdown<S> {
    pub v_desired: S,
    pub v_curvature: S,
    pub v_proximity: S,
    pub v_combined: S,
    pub v_goal_scaled: S,
    pub v_final: S,
    pub kappa: S,
    #[serde(rename = "d_O")]
    pub d_o: S,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControllerWarning<S> {
    /// The collision horizon at the commanded speed reaches past the map.
    RollingWindow(RollingWindowWarning<S>),
    /// A projected pose fell outside the map and was treated as a collision.
    ProjectionLeftGrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput<S> {
    pub command: VelocityCommand<S>,
    pub status: ControllerStatus,
    pub breakdown: RegulationBreakdown<S>,
    /// Lookahead point in the world frame, when one was selected.
    pub lookahead_point: Option<PathPoint<S>>,
    pub lookahead_distance: S,
    pub warnings: Vec<ControllerWarning<S>>,
}

/// Curvature of the arc through the robot origin, tangent to its heading,
/// that reaches `lookahead` (robot frame).
pub fn compute_curvature<S: Scalar>(lookahead: &PathPoint<S>) -> Result<S, ControllerError> {
    let dist_sq = lookahead.dot(lookahead);
    if dist_sq.sqrt() <= S::lit(DEGENERATE_LOOKAHEAD) {
        return Err(ControllerError::DegenerateLookahead);
    }
    Ok(S::two() * lookahead.y / dist_sq)
}

/// Scales `v` by `1 / (r_min * |kappa|)` when the turn radius `1 / |kappa|`
/// is below `r_min`.
pub fn curvature_heuristic<S: Scalar>(v: S, kappa: S, r_min: S) -> S {
    let kappa = kappa.abs();
    if kappa <= r_min.recip() {
        v
    } else {
        v / (r_min * kappa)
    }
}

/// Scales `v` by `alpha * d_o / d_prox` when the obstacle distance is within
/// `d_prox`.
pub fn proximity_heuristic<S: Scalar>(v: S, d_o: S, d_prox: S, alpha: S) -> S {
    if d_o > d_prox {
        v
    } else {
        v * alpha * d_o.max(S::zero()) / d_prox
    }
}

/// Keeps the stronger of the two slowdowns.
pub fn combine_regulation<S: Scalar>(v_curvature: S, v_proximity: S) -> S {
    v_curvature.min(v_proximity)
}

/// Linear slowdown inside `slowdown_radius` of the goal, never below the
/// floor.
pub fn goal_approach_scaling<S: Scalar>(v: S, dist_to_goal: S, slowdown_radius: S, v_min_floor: S) -> S {
    if dist_to_goal >= slowdown_radius {
        v
    } else {
        (v * dist_to_goal / slowdown_radius).max(v_min_floor)
    }
}

pub fn apply_speed_floor<S: Scalar>(v: S, v_min_floor: S) -> S {
    v.max(v_min_floor)
}

/// `omega = v * kappa`, saturated at `omega_max`. On saturation `v` is
/// rescaled so `omega / v` stays exactly `kappa`.
pub fn angular_velocity<S: Scalar>(v_regulated: S, kappa: S, omega_max: S) -> (S, S) {
    let omega = v_regulated * kappa;
    if omega.abs() > omega_max {
        let omega = omega_max.copysign(omega);
        (omega / kappa, omega)
    } else {
        (v_regulated, omega)
    }
}

pub fn rotate_in_place<S: Scalar>(angle_error: S, omega_max: S, gain: S) -> VelocityCommand<S> {
    let omega = (gain * angle_error).max(-omega_max).min(omega_max);
    VelocityCommand::new(S::zero(), omega)
}

/// One tracking session: a configuration, the stored path and the
/// behavior latches that persist between cycles.
#[derive(Debug, Clone)]
pub struct Controller<S> {
    config: ControllerConfig<S>,
    path: Option<Path<S>>,
    goal_latched: bool,
    rotating_to_heading: bool,
}

impl<S: Scalar> Controller<S> {
    pub fn new(config: ControllerConfig<S>) -> Result<Self, ControllerError> {
        config.validate()?;
        Ok(Self {
            config,
            path: None,
            goal_latched: false,
            rotating_to_heading: false,
        })
    }

    pub fn config(&self) -> &ControllerConfig<S> {
        &self.config
    }

    pub fn path(&self) -> Option<&Path<S>> {
        self.path.as_ref()
    }

    /// Replaces the tracked path. Pruning and goal state start over.
    pub fn set_path(&mut self, path: Path<S>) {
        self.path = Some(path);
        self.goal_latched = false;
        self.rotating_to_heading = false;
    }

    /// Produces the command for the current cycle. `current_speed` is the
    /// measured linear speed, which sets the adaptive lookahead.
    pub fn compute_command(
        &mut self,
        pose: &Pose2D<S>,
        current_speed: S,
        field: &DistanceField<S>,
    ) -> Result<ControlOutput<S>, ControllerError> {
        let cfg = self.config.clone();
        let path = self.path.as_mut().ok_or(ControllerError::NoValidPath)?;
        let d_o = distance_to_obstacle(field, pose).unwrap_or(S::zero());
        let mut breakdown = RegulationBreakdown {
            v_desired: cfg.v_desired,
            d_o,
            ..Default::default()
        };

        let closest = find_closest_index(path, pose)?;
        let goal = path.goal();
        let goal_dist = (pose.x - goal.x).hypot(pose.y - goal.y);
        if !self.goal_latched
            && goal_dist <= cfg.goal_xy_tolerance
            && path.remaining_length(closest) <= cfg.lookahead_max.max(cfg.fixed_lookahead)
        {
            self.goal_latched = true;
        }
        if self.goal_latched {
            let (command, status) = match path.final_heading() {
                Some(heading) => {
                    let err = normalize_angle(heading - pose.theta()).expect("finite heading");
                    if err.abs() <= cfg.goal_yaw_tolerance {
                        (VelocityCommand::zero(), ControllerStatus::GoalReached)
                    } else {
                        (
                            rotate_in_place(err, cfg.omega_max, cfg.rotate_to_heading_gain),
                            ControllerStatus::RotatingToGoal,
                        )
                    }
                }
                None => (VelocityCommand::zero(), ControllerStatus::GoalReached),
            };
            return Ok(self.finish(pose, command, status, breakdown, None, S::zero(), field));
        }

        path.prune_passed(closest)?;
        let remaining = path.remaining_length(closest);

        let mut lookahead = lookahead_distance(cfg.variant, current_speed, &cfg);
        let mut view = build_local_view(path, pose, lookahead, cfg.far_prune_factor);

        let mut reversing = false;
        let mut stop_distance = remaining;
        if cfg.allow_reversing {
            reversing = first_direction(&view).is_some_and(|d| d.x < S::zero());
            if let Some(cusp) = detect_cusp(&view) {
                stop_distance = stop_distance.min(cusp.arc_distance);
                view.points.truncate(cusp.view_index + 1);
                view.source_indices.truncate(cusp.view_index + 1);
                lookahead = lookahead.min(cusp.arc_distance);
            }
        }

        let carrot = select_lookahead_point(&view, lookahead, cfg.use_interpolation);
        let carrot_world = pose.to_world_frame(&carrot);

        let kappa = match compute_curvature(&carrot) {
            Ok(k) => k,
            Err(_) => {
                // Sitting on the lookahead point: turn towards the path.
                let heading = first_direction(&view).map_or(S::zero(), |d| d.y.atan2(d.x));
                let command = rotate_in_place(heading, cfg.omega_max, cfg.rotate_to_heading_gain);
                return Ok(self.finish(
                    pose,
                    command,
                    ControllerStatus::RotatingToHeading,
                    breakdown,
                    Some(carrot_world),
                    lookahead,
                    field,
                ));
            }
        };
        breakdown.kappa = kappa;

        if cfg.use_rotate_to_heading && !reversing {
            let heading_err = carrot.y.atan2(carrot.x);
            let far_from_goal = remaining > cfg.goal_xy_tolerance;
            if self.rotating_to_heading {
                self.rotating_to_heading = heading_err.abs() > cfg.rotate_to_heading_threshold * S::half();
            } else {
                self.rotating_to_heading = far_from_goal
                    && heading_err.abs() > cfg.rotate_to_heading_threshold
                    && current_speed.abs() < cfg.v_min_floor;
            }
            if self.rotating_to_heading {
                let command = rotate_in_place(heading_err, cfg.omega_max, cfg.rotate_to_heading_gain);
                return Ok(self.finish(
                    pose,
                    command,
                    ControllerStatus::RotatingToHeading,
                    breakdown,
                    Some(carrot_world),
                    lookahead,
                    field,
                ));
            }
        }

        let v_desired = cfg.v_desired;
        let (v_curvature, v_proximity, v_combined) = match cfg.variant {
            Variant::Rpp => {
                let v_curvature = curvature_heuristic(v_desired, kappa, cfg.r_min);
                let v_proximity = proximity_heuristic(v_desired, d_o, cfg.d_prox, cfg.alpha);
                (v_curvature, v_proximity, combine_regulation(v_curvature, v_proximity))
            }
            Variant::Pp | Variant::App => (v_desired, v_desired, v_desired),
        };
        let v_goal_scaled = goal_approach_scaling(v_combined, stop_distance, cfg.slowdown_radius, cfg.v_min_floor);
        let speed = apply_speed_floor(v_goal_scaled, cfg.v_min_floor).min(cfg.v_max);
        let signed = if reversing { -speed } else { speed };
        let (v, omega) = angular_velocity(signed, kappa, cfg.omega_max);

        breakdown.v_curvature = v_curvature;
        breakdown.v_proximity = v_proximity;
        breakdown.v_combined = v_combined;
        breakdown.v_goal_scaled = v_goal_scaled;
        breakdown.v_final = v.abs();

        let status = if reversing {
            ControllerStatus::ReverseTracking
        } else {
            ControllerStatus::Tracking
        };
        Ok(self.finish(
            pose,
            VelocityCommand::new(v, omega),
            status,
            breakdown,
            Some(carrot_world),
            lookahead,
            field,
        ))
    }

    /// Applies the collision gate and the rolling window guard.
    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        pose: &Pose2D<S>,
        command: VelocityCommand<S>,
        status: ControllerStatus,
        mut breakdown: RegulationBreakdown<S>,
        lookahead_point: Option<PathPoint<S>>,
        lookahead_distance: S,
        field: &DistanceField<S>,
    ) -> ControlOutput<S> {
        let cfg = &self.config;
        let mut warnings = Vec::new();
        let mut command = command;
        let mut status = status;
        let moving = command.v != S::zero() || command.omega != S::zero();
        if cfg.use_collision_checking && moving {
            if let Some(w) = rolling_window_guard(command.v, cfg.collision_horizon, pose, field.geometry()) {
                log::warn!(
                    "collision horizon reaches {} m but the map edge is {} m away",
                    w.reach,
                    w.margin
                );
                warnings.push(ControllerWarning::RollingWindow(w));
            }
            let arc = project_arc(
                pose,
                command.v,
                command.omega,
                cfg.collision_horizon,
                field.geometry().resolution,
                cfg.robot_radius,
            );
            let check = check_collision(field, &arc, cfg.robot_radius);
            if check.left_grid {
                warnings.push(ControllerWarning::ProjectionLeftGrid);
            }
            if check.time_to_collision.is_some() {
                command = VelocityCommand::zero();
                status = ControllerStatus::StoppedImminentCollision;
                breakdown.v_final = S::zero();
            }
        }
        ControlOutput {
            command,
            status,
            breakdown,
            lookahead_point,
            lookahead_distance,
            warnings,
        }
    }
}

/// Direction of the first non-degenerate segment of a view.
fn first_direction<S: Scalar>(view: &LocalPathView<S>) -> Option<PathPoint<S>> {
    view.points
        .windows(2)
        .map(|w| w[1].sub(&w[0]))
        .find(|d| d.norm() > S::zero())
}
