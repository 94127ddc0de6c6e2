//! Path tracking with Pure Pursuit and its adaptive and regulated variants.
//!
//! Everything is generic over the scalar type ([`Scalar`], implemented for
//! `f32` and `f64`). Concrete aliases for both widths are exported at the
//! crate root.

pub mod collision;
pub mod config;
pub mod controller;
pub mod geometry;
pub mod path;
mod scalar;

pub use collision::{
    check_collision, compute_distance_field, distance_to_obstacle, project_arc, rolling_window_guard, unicycle_motion,
    ArcProjection, CollisionCheck, CollisionError, DistanceField, GridGeometry, OccupancyGrid, RollingWindowWarning,
};
pub use config::{ConfigError, ControllerConfig, Variant};
pub use controller::{
    angular_velocity, apply_speed_floor, combine_regulation, compute_curvature, curvature_heuristic,
    goal_approach_scaling, proximity_heuristic, rotate_in_place, ControlOutput, Controller, ControllerError,
    ControllerStatus, ControllerWarning, RegulationBreakdown,
};
pub use geometry::{
    euclidean_distance, normalize_angle, to_robot_frame, GeometryError, PathPoint, Pose2D, VelocityCommand,
};
pub use path::{
    build_local_view, detect_cusp, find_closest_index, lookahead_distance, select_lookahead_point, CuspInfo,
    LocalPathView, Path, PathError,
};
pub use scalar::Scalar;

pub type PathPointF64 = PathPoint<f64>;
pub type Pose2DF64 = Pose2D<f64>;
pub type VelocityCommandF64 = VelocityCommand<f64>;
pub type PathF64 = Path<f64>;
pub type ControllerConfigF64 = ControllerConfig<f64>;
pub type ControllerF64 = Controller<f64>;
pub type OccupancyGridF64 = OccupancyGrid<f64>;
pub type DistanceFieldF64 = DistanceField<f64>;

pub type PathPointF32 = PathPoint<f32>;
pub type Pose2DF32 = Pose2D<f32>;
pub type VelocityCommandF32 = VelocityCommand<f32>;
pub type PathF32 = Path<f32>;
pub type ControllerConfigF32 = ControllerConfig<f32>;
pub type ControllerF32 = Controller<f32>;
pub type OccupancyGridF32 = OccupancyGrid<f32>;
pub type DistanceFieldF32 = DistanceField<f32>;
