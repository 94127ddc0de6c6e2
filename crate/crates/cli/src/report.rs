//! Comparison table and sweep CSV.

use std::fmt::Write as _;

use pursuit_sim::{MetricsReport, TrajectoryLog};

/// Row names of the comparison table, in order.
pub const COMPARE_ROWS: [&str; 6] = [
    "time",
    "distance_traveled",
    "collisions",
    "average_speed",
    "average_distance_to_obstacle",
    "average_distance_to_path",
];

pub const SWEEP_COLUMNS: [&str; 10] = [
    "value",
    "average_distance_to_path",
    "time",
    "average_speed",
    "average_speed_near_obstacles",
    "distance_traveled",
    "collisions",
    "min_distance_to_obstacle",
    "outcome",
    "success",
];

/// One comparison column. `metrics` is `None` when the run errored.
pub struct Column<'a> {
    pub name: &'a str,
    pub metrics: Option<&'a MetricsReport>,
}

fn cell(m: &MetricsReport, row: &str) -> String {
    match row {
        "time" => format!("{:.2}", m.time),
        "distance_traveled" => format!("{:.3}", m.distance_traveled),
        "collisions" => m.collisions.to_string(),
        "average_speed" => format!("{:.3}", m.average_speed),
        "average_distance_to_obstacle" => format!("{:.3}", m.average_distance_to_obstacle),
        "average_distance_to_path" => format!("{:.4}", m.average_distance_to_path),
        _ => unreachable!("unknown row {row}"),
    }
}

/// Fixed-width table, one row per metric and one column per variant. A
/// column whose run did not succeed carries a `(failed)` mark.
pub fn comparison_table(columns: &[Column<'_>]) -> String {
    let label_width = COMPARE_ROWS.iter().map(|r| r.len()).max().unwrap_or(0);
    let headers: Vec<String> = columns
        .iter()
        .map(|c| match c.metrics {
            Some(m) if m.success => c.name.to_string(),
            _ => format!("{} (failed)", c.name),
        })
        .collect();
    let width = headers.iter().map(String::len).max().unwrap_or(0).max(10);
    let mut s = String::new();
    write!(s, "{:<label_width$}", "metric").unwrap();
    for h in &headers {
        write!(s, "  {h:>width$}").unwrap();
    }
    s.push('\n');
    for row in COMPARE_ROWS {
        write!(s, "{row:<label_width$}").unwrap();
        for c in columns {
            let v = c.metrics.map_or_else(|| "-".to_string(), |m| cell(m, row));
            write!(s, "  {v:>width$}").unwrap();
        }
        s.push('\n');
    }
    s
}

/// Mean speed over the cycles spent within `d_prox` of an obstacle, or
/// `None` if the run never came that close.
pub fn speed_near_obstacles(log: &TrajectoryLog, d_prox: f64) -> Option<f64> {
    let near: Vec<f64> = log
        .records
        .iter()
        .filter(|r| r.d_o <= d_prox)
        .map(|r| r.v.abs())
        .collect();
    (!near.is_empty()).then(|| near.iter().sum::<f64>() / near.len() as f64)
}

pub struct SweepRow {
    pub value: f64,
    pub metrics: MetricsReport,
    pub speed_near_obstacles: Option<f64>,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = SWEEP_COLUMNS.join(",");
    s.push('\n');
    for r in rows {
        let m = &r.metrics;
        let near = r.speed_near_obstacles.map_or_else(String::new, |v| v.to_string());
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.value,
            m.average_distance_to_path,
            m.time,
            m.average_speed,
            near,
            m.distance_traveled,
            m.collisions,
            m.min_distance_to_obstacle,
            m.outcome.as_str(),
            m.success
        )
        .unwrap();
    }
    s
}
