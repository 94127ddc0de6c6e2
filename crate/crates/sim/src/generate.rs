//! Scenario generators: step path, blind corner, slalom corridor and
//! waypoint route.
//!
//! Corridors are carved out of a fully occupied grid: a cell is free when
//! its center lies within half the corridor width of the corridor's center
//! polyline. Generator parameters are plain structs with defaults and can be
//! overridden from a TOML table.

use std::fmt;
use std::str::FromStr;

use pursuit_core::{GridGeometry, OccupancyGrid, Path, PathPoint, Pose2D};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::metrics::distance_to_polyline;
use crate::scenario::{EventSpec, Scenario};
use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    StepPath,
    BlindCorner,
    Slalom,
    WaypointRoute,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::StepPath,
        ScenarioKind::BlindCorner,
        ScenarioKind::Slalom,
        ScenarioKind::WaypointRoute,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::StepPath => "step_path",
            ScenarioKind::BlindCorner => "blind_corner",
            ScenarioKind::Slalom => "slalom",
            ScenarioKind::WaypointRoute => "waypoint_route",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| SimError::InvalidScenario(format!("unknown scenario kind '{s}'")))
    }
}

/// Open-space staircase: horizontal runs joined by vertical rises.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepPathParams {
    pub run: f64,
    pub amplitude: f64,
    pub steps: usize,
    pub resolution: f64,
    pub margin: f64,
    pub v_desired: f64,
    pub r_min: f64,
    /// Written to the scenario's `[sim]` table.
    pub a_max: f64,
}

impl Default for StepPathParams {
    fn default() -> Self {
        Self {
            run: 5.0,
            amplitude: 2.0,
            steps: 2,
            resolution: 0.05,
            margin: 2.5,
            v_desired: 1.0,
            r_min: 1.5,
            a_max: 0.5,
        }
    }
}

/// L-shaped corridor turning left, with an obstacle that appears on the
/// outgoing leg once the robot crosses a line on the incoming leg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlindCornerParams {
    pub leg_in: f64,
    pub leg_out: f64,
    pub corridor_width: f64,
    pub obstacle_size: f64,
    /// Distance from the corner apex to the obstacle's near face.
    pub obstacle_offset: f64,
    /// Distance before the apex of the trigger line.
    pub trigger_before: f64,
    pub robot_radius: f64,
    pub resolution: f64,
    pub margin: f64,
    /// Written to the scenario's `[controller]` table.
    pub collision_horizon: f64,
    /// Written to the scenario's `[sim]` table.
    pub a_max: f64,
}

impl Default for BlindCornerParams {
    fn default() -> Self {
        Self {
            leg_in: 6.0,
            leg_out: 5.0,
            corridor_width: 1.2,
            obstacle_size: 0.5,
            obstacle_offset: 1.25,
            trigger_before: 0.3,
            robot_radius: 0.25,
            resolution: 0.05,
            margin: 1.0,
            collision_horizon: 1.5,
            a_max: 0.5,
        }
    }
}

/// Straight corridor with square blocks alternately against either wall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlalomParams {
    pub corridor_width: f64,
    pub obstacle_size: f64,
    pub obstacle_count: usize,
    /// Distance between consecutive block centers along the corridor.
    pub spacing: f64,
    /// Straight run before the first and after the last block.
    pub lead: f64,
    pub robot_radius: f64,
    pub resolution: f64,
    pub margin: f64,
    /// Written to the scenario's `[controller]` table.
    pub collision_horizon: f64,
    /// Written to the scenario's `[sim]` table.
    pub a_max: f64,
}

impl Default for SlalomParams {
    fn default() -> Self {
        Self {
            corridor_width: 1.5,
            obstacle_size: 0.7,
            obstacle_count: 4,
            spacing: 3.0,
            lead: 1.5,
            robot_radius: 0.25,
            resolution: 0.05,
            margin: 1.0,
            collision_horizon: 1.5,
            a_max: 0.5,
        }
    }
}

/// Corridor along straight segments through the given waypoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaypointRouteParams {
    pub waypoints: Vec<[f64; 2]>,
    pub corridor_width: f64,
    pub robot_radius: f64,
    pub resolution: f64,
    pub margin: f64,
    /// Written to the scenario's `[controller]` table.
    pub collision_horizon: f64,
    /// Written to the scenario's `[sim]` table.
    pub a_max: f64,
}

impl Default for WaypointRouteParams {
    fn default() -> Self {
        Self {
            waypoints: vec![
                [0.0, 0.0],
                [8.0, 0.0],
                [8.0, 5.0],
                [14.0, 5.0],
                [14.0, -1.0],
                [20.0, -1.0],
            ],
            corridor_width: 2.0,
            robot_radius: 0.25,
            resolution: 0.05,
            margin: 1.0,
            collision_horizon: 1.5,
            a_max: 0.5,
        }
    }
}

/// Builds a scenario of `kind` from default parameters overridden by
/// `params`.
pub fn generate_scenario(kind: ScenarioKind, params: &toml::Table) -> Result<Scenario, SimError> {
    match kind {
        ScenarioKind::StepPath => step_path(&merged(params)?),
        ScenarioKind::BlindCorner => blind_corner(&merged(params)?),
        ScenarioKind::Slalom => slalom(&merged(params)?),
        ScenarioKind::WaypointRoute => waypoint_route(&merged(params)?),
    }
}

fn merged<P: Default + Serialize + DeserializeOwned>(overrides: &toml::Table) -> Result<P, SimError> {
    let mut table = toml::Table::try_from(P::default()).expect("params serialize");
    for (key, value) in overrides {
        table.insert(key.clone(), value.clone());
    }
    table
        .try_into()
        .map_err(|e: toml::de::Error| SimError::InvalidScenario(e.to_string()))
}

pub fn step_path(p: &StepPathParams) -> Result<Scenario, SimError> {
    positive(&[
        ("run", p.run),
        ("amplitude", p.amplitude),
        ("resolution", p.resolution),
        ("a_max", p.a_max),
    ])?;
    let mut vertices = vec![PathPoint::new(0.0, 0.0)];
    let (mut x, mut y) = (0.0, 0.0);
    for _ in 0..p.steps {
        x += p.run;
        vertices.push(PathPoint::new(x, y));
        y += p.amplitude;
        vertices.push(PathPoint::new(x, y));
    }
    vertices.push(PathPoint::new(x + p.run, y));
    let geometry = geometry_around(&vertices, p.margin, p.resolution)?;
    let mut controller = toml::Table::new();
    controller.insert("v_desired".into(), p.v_desired.into());
    controller.insert("v_max".into(), p.v_desired.into());
    controller.insert("r_min".into(), p.r_min.into());
    let mut sim = toml::Table::new();
    sim.insert("a_max".into(), p.a_max.into());
    Ok(Scenario {
        name: "step_path".into(),
        grid: OccupancyGrid::new(geometry),
        path: Path::new(densify(&vertices, p.resolution))?,
        start: start_pose(&vertices),
        events: Vec::new(),
        controller,
        sim,
        inputs: Vec::new(),
    })
}

pub fn blind_corner(p: &BlindCornerParams) -> Result<Scenario, SimError> {
    positive(&[
        ("leg_in", p.leg_in),
        ("leg_out", p.leg_out),
        ("obstacle_size", p.obstacle_size),
        ("resolution", p.resolution),
        ("collision_horizon", p.collision_horizon),
        ("a_max", p.a_max),
    ])?;
    check_width(p.corridor_width, p.robot_radius)?;
    if p.obstacle_offset + p.obstacle_size > p.leg_out {
        return Err(SimError::InvalidScenario(
            "obstacle does not fit on the outgoing leg".into(),
        ));
    }
    let apex = PathPoint::new(p.leg_in, 0.0);
    let vertices = vec![PathPoint::new(0.0, 0.0), apex, PathPoint::new(apex.x, p.leg_out)];
    let half = p.corridor_width / 2.0;
    let geometry = geometry_around(&vertices, half + p.margin, p.resolution)?;
    let grid = carve_corridor(geometry, &vertices, half);
    let s = p.obstacle_size;
    let trigger_x = apex.x - p.trigger_before;
    let (controller, sim) = overrides(p.collision_horizon, p.a_max);
    Ok(Scenario {
        name: "blind_corner".into(),
        grid,
        path: Path::new(densify(&vertices, p.resolution))?,
        start: start_pose(&vertices),
        events: vec![EventSpec {
            trigger: [[trigger_x, -half], [trigger_x, half]],
            rect: [
                [apex.x - s / 2.0, p.obstacle_offset],
                [apex.x + s / 2.0, p.obstacle_offset + s],
            ],
        }],
        controller,
        sim,
        inputs: Vec::new(),
    })
}

pub fn slalom(p: &SlalomParams) -> Result<Scenario, SimError> {
    positive(&[
        ("obstacle_size", p.obstacle_size),
        ("spacing", p.spacing),
        ("lead", p.lead),
        ("resolution", p.resolution),
        ("collision_horizon", p.collision_horizon),
        ("a_max", p.a_max),
    ])?;
    check_width(p.corridor_width, p.robot_radius)?;
    let half = p.corridor_width / 2.0;
    let gap = p.corridor_width - p.obstacle_size;
    check_width(gap, p.robot_radius)?;
    if p.obstacle_size >= p.spacing {
        return Err(SimError::InvalidScenario("slalom blocks overlap".into()));
    }
    let length = 2.0 * p.lead + p.spacing * p.obstacle_count.saturating_sub(1) as f64;
    let axis = vec![PathPoint::new(0.0, 0.0), PathPoint::new(length, 0.0)];
    let geometry = geometry_around(&axis, half + p.margin, p.resolution)?;
    let mut grid = carve_corridor(geometry, &axis, half);

    // Block i sits against the upper wall for even i, the lower for odd i;
    // the path passes through the middle of the opening beside it.
    let mut knots = vec![(0.0, 0.0)];
    for i in 0..p.obstacle_count {
        let cx = p.lead + i as f64 * p.spacing;
        let upper = i % 2 == 0;
        let (y0, y1) = if upper {
            (half - p.obstacle_size, half)
        } else {
            (-half, -half + p.obstacle_size)
        };
        // Extend past the wall so no sliver of free cells remains.
        let (y0, y1) = if upper {
            (y0, y1 + p.resolution)
        } else {
            (y0 - p.resolution, y1)
        };
        grid.fill_rect(
            &PathPoint::new(cx - p.obstacle_size / 2.0, y0),
            &PathPoint::new(cx + p.obstacle_size / 2.0, y1),
        );
        let opening = if upper { -half + gap / 2.0 } else { half - gap / 2.0 };
        knots.push((cx, opening));
    }
    knots.push((length, 0.0));
    let path = weave(&knots, p.resolution);
    let start = Pose2D::new(
        path[0].x,
        path[0].y,
        (path[1].y - path[0].y).atan2(path[1].x - path[0].x),
    );
    let (controller, sim) = overrides(p.collision_horizon, p.a_max);
    Ok(Scenario {
        name: "slalom".into(),
        grid,
        path: Path::new(path)?,
        start,
        events: Vec::new(),
        controller,
        sim,
        inputs: Vec::new(),
    })
}

pub fn waypoint_route(p: &WaypointRouteParams) -> Result<Scenario, SimError> {
    positive(&[
        ("resolution", p.resolution),
        ("collision_horizon", p.collision_horizon),
        ("a_max", p.a_max),
    ])?;
    check_width(p.corridor_width, p.robot_radius)?;
    let vertices: Vec<_> = p.waypoints.iter().map(|w| PathPoint::new(w[0], w[1])).collect();
    if vertices.len() < 2 {
        return Err(SimError::InvalidScenario("a route needs at least two waypoints".into()));
    }
    let half = p.corridor_width / 2.0;
    let geometry = geometry_around(&vertices, half + p.margin, p.resolution)?;
    let (controller, sim) = overrides(p.collision_horizon, p.a_max);
    Ok(Scenario {
        name: "waypoint_route".into(),
        grid: carve_corridor(geometry, &vertices, half),
        path: Path::new(densify(&vertices, p.resolution))?,
        start: start_pose(&vertices),
        events: Vec::new(),
        controller,
        sim,
        inputs: Vec::new(),
    })
}

/// `[controller]` and `[sim]` tables carrying a scenario's horizon and
/// acceleration limit.
fn overrides(collision_horizon: f64, a_max: f64) -> (toml::Table, toml::Table) {
    let mut controller = toml::Table::new();
    controller.insert("collision_horizon".into(), collision_horizon.into());
    let mut sim = toml::Table::new();
    sim.insert("a_max".into(), a_max.into());
    (controller, sim)
}

fn positive(values: &[(&str, f64)]) -> Result<(), SimError> {
    for (name, v) in values {
        if !(v.is_finite() && *v > 0.0) {
            return Err(SimError::InvalidScenario(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

fn check_width(width: f64, robot_radius: f64) -> Result<(), SimError> {
    if width < 2.0 * robot_radius {
        return Err(SimError::InvalidScenario(format!(
            "passage of {width} m is narrower than the robot ({} m)",
            2.0 * robot_radius
        )));
    }
    Ok(())
}

/// Samples the polyline so consecutive points are at most `spacing` apart.
pub fn densify(vertices: &[PathPoint<f64>], spacing: f64) -> Vec<PathPoint<f64>> {
    let mut out = vec![vertices[0]];
    for w in vertices.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b.x - a.x).hypot(b.y - a.y);
        let n = (len / spacing - 1e-9).ceil().max(1.0) as usize;
        for k in 1..=n {
            let t = k as f64 / n as f64;
            out.push(PathPoint::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
        }
    }
    out
}

/// Smooth path through `knots` (increasing x): each span blends between
/// its end heights with a half cosine, so the slope is zero at every knot.
fn weave(knots: &[(f64, f64)], spacing: f64) -> Vec<PathPoint<f64>> {
    let mut out = vec![PathPoint::new(knots[0].0, knots[0].1)];
    for w in knots.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        // Sample finely enough that chords stay within `spacing`.
        let n = ((x1 - x0).hypot(y1 - y0) * 1.6 / spacing).ceil().max(1.0) as usize;
        for k in 1..=n {
            let s = k as f64 / n as f64;
            let y = y0 + (y1 - y0) * (1.0 - (std::f64::consts::PI * s).cos()) / 2.0;
            out.push(PathPoint::new(x0 + s * (x1 - x0), y));
        }
    }
    out
}

fn start_pose(vertices: &[PathPoint<f64>]) -> Pose2D<f64> {
    let (a, b) = (vertices[0], vertices[1]);
    Pose2D::new(a.x, a.y, (b.y - a.y).atan2(b.x - a.x))
}

/// Grid covering the bounding box of `points` plus `margin` on every side.
fn geometry_around(points: &[PathPoint<f64>], margin: f64, resolution: f64) -> Result<GridGeometry<f64>, SimError> {
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = PathPoint::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = PathPoint::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let width = ((hi.x - lo.x + 2.0 * margin) / resolution).ceil() as usize;
    let height = ((hi.y - lo.y + 2.0 * margin) / resolution).ceil() as usize;
    Ok(GridGeometry::new(
        width,
        height,
        resolution,
        PathPoint::new(lo.x - margin, lo.y - margin),
    )?)
}

fn carve_corridor(geometry: GridGeometry<f64>, centerline: &[PathPoint<f64>], half_width: f64) -> OccupancyGrid<f64> {
    let mut grid = OccupancyGrid::new(geometry);
    for row in 0..geometry.height {
        for col in 0..geometry.width {
            let center = geometry.cell_center(col, row);
            grid.set_occupied(col, row, distance_to_polyline(&center, centerline) > half_width);
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use pursuit_core::compute_distance_field;

    #[test]
    fn step_path_points_follow_resolution() {
        let s = generate_scenario(ScenarioKind::StepPath, &toml::Table::new()).unwrap();
        for w in s.path.points().windows(2) {
            let d = (w[1].x - w[0].x).hypot(w[1].y - w[0].y);
            assert_relative_eq!(d, 0.05, max_relative = 1e-6);
        }
        let pts = s.path.points();
        assert_eq!(pts[0], PathPoint::new(0.0, 0.0));
        assert_relative_eq!(pts.last().unwrap().y, 4.0);
        assert_eq!(s.grid.occupied_count(), 0);
        assert_eq!(s.controller["r_min"].as_float(), Some(1.5));
    }

    #[test]
    fn slalom_corridor_and_obstacle_dimensions() {
        let p = SlalomParams::default();
        let s = slalom(&p).unwrap();
        let geom = *s.grid.geometry();
        // Free extent across the corridor at a block-free station.
        let free_across = |x: f64| {
            (0..geom.height)
                .filter(|&row| {
                    let c = geom.cell_center(0, row);
                    !s.grid.is_occupied_at(&PathPoint::new(x, c.y))
                })
                .count() as f64
                * geom.resolution
        };
        assert_relative_eq!(free_across(0.5), 1.5, epsilon = 1e-9);
        // At a block center the opening is the width minus the block.
        assert_relative_eq!(free_across(p.lead), 0.8, epsilon = 1e-9);
        // Block extent along the corridor.
        let y = 0.75 - 0.35;
        let along = (0..geom.width)
            .filter(|&col| {
                let c = geom.cell_center(col, 0);
                (c.x - p.lead).abs() < 1.0 && s.grid.is_occupied_at(&PathPoint::new(c.x, y))
            })
            .count() as f64
            * geom.resolution;
        assert_relative_eq!(along, 0.7, epsilon = 1e-9);
        // The path keeps the robot clear of every block.
        let field = compute_distance_field(&s.grid);
        for q in s.path.points() {
            let d = field.at_point(q).unwrap();
            assert!(d > p.robot_radius, "path point {q:?} only {d} from an obstacle");
        }
    }

    #[test]
    fn blind_corner_obstacle_only_in_event() {
        let s = blind_corner(&BlindCornerParams::default()).unwrap();
        let (a, b) = s.events[0].rect_points();
        let mid = PathPoint::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
        assert!(!s.grid.is_occupied_at(&mid));
        let mut after = s.grid.clone();
        after.fill_rect(&a, &b);
        assert!(after.is_occupied_at(&mid));
        assert_eq!(after.occupied_count() - s.grid.occupied_count(), 100);
    }

    #[test]
    fn rejects_narrow_passages() {
        let mut narrow = toml::Table::new();
        narrow.insert("corridor_width".into(), 0.4.into());
        for kind in [
            ScenarioKind::BlindCorner,
            ScenarioKind::Slalom,
            ScenarioKind::WaypointRoute,
        ] {
            assert!(
                matches!(generate_scenario(kind, &narrow), Err(SimError::InvalidScenario(_))),
                "{kind}"
            );
        }
        let mut blocked = toml::Table::new();
        blocked.insert("obstacle_size".into(), 1.2.into());
        assert!(generate_scenario(ScenarioKind::Slalom, &blocked).is_err());
    }

    #[test]
    fn unknown_params_are_rejected() {
        let mut bad = toml::Table::new();
        bad.insert("bogus".into(), 1.0.into());
        assert!(generate_scenario(ScenarioKind::StepPath, &bad).is_err());
    }

    #[test]
    fn kinds_parse() {
        for k in ScenarioKind::ALL {
            assert_eq!(k.as_str().parse::<ScenarioKind>().unwrap(), k);
        }
        assert!("zigzag".parse::<ScenarioKind>().is_err());
    }

    #[test]
    fn every_path_point_is_free() {
        for kind in ScenarioKind::ALL {
            let s = generate_scenario(kind, &toml::Table::new()).unwrap();
            for q in s.path.points() {
                assert!(!s.grid.is_occupied_at(q), "{kind}: {q:?}");
            }
        }
    }
}
