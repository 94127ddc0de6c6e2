//! Scenario files.
//!
//! A scenario is a TOML document naming a grid file and a path file
//! (relative to the scenario file), the start pose, and optional grid events
//! and parameter overrides:
//!
//! ```toml
//! name = "blind_corner"
//! grid = "grid.txt"
//! path = "path.csv"
//!
//! [start]
//! x = 0.0
//! y = 0.0
//! theta = 0.0
//!
//! [[events]]
//! trigger = [[3.0, -1.0], [3.0, 1.0]]
//! rect = [[4.5, 1.0], [5.0, 1.5]]
//!
//! [controller]
//! v_desired = 1.0
//!
//! [sim]
//! a_max = 0.2
//! ```
//!
//! An event fires once, the first time the robot's motion over a control
//! period crosses the trigger segment, and marks the rectangle occupied.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use pursuit_core::{OccupancyGrid, Path, PathPoint, Pose2D};
use serde::{Deserialize, Serialize};

use crate::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub trigger: [[f64; 2]; 2],
    pub rect: [[f64; 2]; 2],
}

impl EventSpec {
    pub fn trigger_points(&self) -> (PathPoint<f64>, PathPoint<f64>) {
        let [a, b] = self.trigger;
        (PathPoint::new(a[0], a[1]), PathPoint::new(b[0], b[1]))
    }

    pub fn rect_points(&self) -> (PathPoint<f64>, PathPoint<f64>) {
        let [a, b] = self.rect;
        (PathPoint::new(a[0], a[1]), PathPoint::new(b[0], b[1]))
    }
}

/// On-disk form of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    /// Generator that produced the files, if any. Informational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    pub grid: PathBuf,
    pub path: PathBuf,
    pub start: Pose2D<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventSpec>,
    #[serde(default, skip_serializing_if = "toml::Table::is_empty")]
    pub controller: toml::Table,
    #[serde(default, skip_serializing_if = "toml::Table::is_empty")]
    pub sim: toml::Table,
}

impl ScenarioFile {
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}

/// A scenario with its grid and path loaded.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub grid: OccupancyGrid<f64>,
    pub path: Path<f64>,
    pub start: Pose2D<f64>,
    pub events: Vec<EventSpec>,
    /// `[controller]` overrides, applied over the caller's base config.
    pub controller: toml::Table,
    /// `[sim]` overrides, applied over the caller's base config.
    pub sim: toml::Table,
    /// Files read to build this scenario, scenario file first.
    pub inputs: Vec<PathBuf>,
}

impl Scenario {
    pub fn load(file: impl AsRef<FsPath>) -> Result<Self, SimError> {
        let file = file.as_ref();
        let text = read(file)?;
        let file_spec: ScenarioFile = toml::from_str(&text).map_err(|e| SimError::Parse {
            path: file.to_path_buf(),
            reason: e.to_string(),
        })?;
        let dir = file.parent().unwrap_or(FsPath::new(""));
        let grid_file = dir.join(&file_spec.grid);
        let path_file = dir.join(&file_spec.path);
        let grid = OccupancyGrid::from_text(&read(&grid_file)?).map_err(|e| SimError::Parse {
            path: grid_file.clone(),
            reason: e.to_string(),
        })?;
        let path = Path::from_csv_file(&path_file).map_err(|e| SimError::Parse {
            path: path_file.clone(),
            reason: e.to_string(),
        })?;
        let scenario = Self {
            name: file_spec.name,
            grid,
            path,
            start: file_spec.start,
            events: file_spec.events,
            controller: file_spec.controller,
            sim: file_spec.sim,
            inputs: vec![file.to_path_buf(), grid_file, path_file],
        };
        scenario.validate_bounds()?;
        Ok(scenario)
    }

    /// Checks that the start pose lies on the grid.
    pub fn validate_bounds(&self) -> Result<(), SimError> {
        if self.grid.geometry().cell_of(&self.start.position()).is_none() {
            return Err(SimError::InvalidScenario(format!(
                "start pose ({}, {}) is outside the grid",
                self.start.x, self.start.y
            )));
        }
        Ok(())
    }

    /// Writes the scenario as `scenario.toml`, `grid.txt` and `path.csv` in
    /// `dir`, returning the scenario file path.
    pub fn write_to_dir(&self, dir: impl AsRef<FsPath>, generator: Option<&str>) -> Result<PathBuf, SimError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
        let grid_file = dir.join("grid.txt");
        fs::write(&grid_file, self.grid.to_text()).map_err(|e| SimError::io(&grid_file, e))?;
        let path_file = dir.join("path.csv");
        let out = fs::File::create(&path_file).map_err(|e| SimError::io(&path_file, e))?;
        self.path.write_csv(out).map_err(|e| SimError::Parse {
            path: path_file.clone(),
            reason: e.to_string(),
        })?;
        let file_spec = ScenarioFile {
            name: self.name.clone(),
            generator: generator.map(str::to_owned),
            grid: "grid.txt".into(),
            path: "path.csv".into(),
            start: self.start,
            events: self.events.clone(),
            controller: self.controller.clone(),
            sim: self.sim.clone(),
        };
        let scenario_file = dir.join("scenario.toml");
        fs::write(&scenario_file, file_spec.to_toml_string()).map_err(|e| SimError::io(&scenario_file, e))?;
        Ok(scenario_file)
    }
}

fn read(path: &FsPath) -> Result<String, SimError> {
    fs::read_to_string(path).map_err(|e| SimError::io(path, e))
}

/// True when segments `a0-a1` and `b0-b1` share a point.
pub fn segments_intersect(a0: &PathPoint<f64>, a1: &PathPoint<f64>, b0: &PathPoint<f64>, b1: &PathPoint<f64>) -> bool {
    fn orient(p: &PathPoint<f64>, q: &PathPoint<f64>, r: &PathPoint<f64>) -> f64 {
        (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
    }
    fn on_segment(p: &PathPoint<f64>, q: &PathPoint<f64>, r: &PathPoint<f64>) -> bool {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    }
    let d1 = orient(b0, b1, a0);
    let d2 = orient(b0, b1, a1);
    let d3 = orient(a0, a1, b0);
    let d4 = orient(a0, a1, b1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(b0, b1, a0))
        || (d2 == 0.0 && on_segment(b0, b1, a1))
        || (d3 == 0.0 && on_segment(a0, a1, b0))
        || (d4 == 0.0 && on_segment(a0, a1, b1))
}
