//! Run metrics: time, distance, speed, obstacle clearance and tracking error.

use std::fmt::Write as _;

use pursuit_core::{Path, PathPoint};

use crate::log::TrajectoryLog;

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    GoalReached,
    /// Held an imminent-collision stop, at rest, for the persistence window.
    StoppedForObstacle,
    Collision,
    Timeout,
    NoValidPath,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::GoalReached => "goal_reached",
            Outcome::StoppedForObstacle => "stopped_for_obstacle",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
            Outcome::NoValidPath => "no_valid_path",
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::GoalReached | Outcome::StoppedForObstacle)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub time: f64,
    pub distance_traveled: f64,
    pub collisions: usize,
    pub average_speed: f64,
    pub min_distance_to_obstacle: f64,
    pub average_distance_to_obstacle: f64,
    pub average_distance_to_path: f64,
    /// Clearance left when the run ended on an obstacle stop.
    pub stopped_distance_to_obstacle: Option<f64>,
    pub outcome: Outcome,
    pub success: bool,
}

impl MetricsReport {
    /// Flat `key = value` text, one metric per line. The stopped distance is
    /// only present after an obstacle stop.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("write to string");
        line("time", format!("{:?}", self.time));
        line("distance_traveled", format!("{:?}", self.distance_traveled));
        line("collisions", self.collisions.to_string());
        line("average_speed", format!("{:?}", self.average_speed));
        line(
            "min_distance_to_obstacle",
            format!("{:?}", self.min_distance_to_obstacle),
        );
        line(
            "average_distance_to_obstacle",
            format!("{:?}", self.average_distance_to_obstacle),
        );
        line(
            "average_distance_to_path",
            format!("{:?}", self.average_distance_to_path),
        );
        if let Some(d) = self.stopped_distance_to_obstacle {
            line("stopped_distance_to_obstacle", format!("{d:?}"));
        }
        line("outcome", format!("\"{}\"", self.outcome.as_str()));
        line("success", self.success.to_string());
        s
    }
}

/// Distance from `p` to the polyline through `points`, by projection onto
/// each segment.
pub fn distance_to_polyline(p: &PathPoint<f64>, points: &[PathPoint<f64>]) -> f64 {
    match points {
        [] => f64::INFINITY,
        [only] => (p.x - only.x).hypot(p.y - only.y),
        _ => points
            .windows(2)
            .map(|w| distance_to_segment(p, &w[0], &w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

fn distance_to_segment(p: &PathPoint<f64>, a: &PathPoint<f64>, b: &PathPoint<f64>) -> f64 {
    let ab = b.sub(a);
    let len_sq = ab.dot(&ab);
    let t = if len_sq == 0.0 {
        0.0
    } else {
        (p.sub(a).dot(&ab) / len_sq).clamp(0.0, 1.0)
    };
    (p.x - (a.x + t * ab.x)).hypot(p.y - (a.y + t * ab.y))
}

/// Summarizes a run. `path` is the full reference path; `outcome` is how
/// the run ended.
pub fn compute_metrics(log: &TrajectoryLog, path: &Path<f64>, robot_radius: f64, outcome: Outcome) -> MetricsReport {
    let records = &log.records;
    let n = records.len().max(1) as f64;
    let time = match (records.first(), records.last()) {
        (Some(a), Some(b)) => b.t - a.t,
        _ => 0.0,
    };
    let distance_traveled: f64 = records
        .windows(2)
        .map(|w| (w[1].pose.x - w[0].pose.x).hypot(w[1].pose.y - w[0].pose.y))
        .sum();
    let collisions = records.iter().filter(|r| r.d_o < robot_radius).count();
    let min_distance_to_obstacle = records.iter().map(|r| r.d_o).fold(f64::INFINITY, f64::min);
    let average_distance_to_obstacle = records.iter().map(|r| r.d_o).sum::<f64>() / n;
    let average_distance_to_path = records
        .iter()
        .map(|r| distance_to_polyline(&r.pose.position(), path.points()))
        .sum::<f64>()
        / n;
    let stopped_distance_to_obstacle = match (outcome, records.last()) {
        (Outcome::StoppedForObstacle, Some(last)) => Some(last.d_o - robot_radius),
        _ => None,
    };
    let collided = collisions > 0 || outcome == Outcome::Collision;
    MetricsReport {
        time,
        distance_traveled,
        collisions,
        average_speed: if time > 0.0 { distance_traveled / time } else { 0.0 },
        min_distance_to_obstacle,
        average_distance_to_obstacle,
        average_distance_to_path,
        stopped_distance_to_obstacle,
        outcome,
        success: outcome.is_success() && !collided,
    }
}
