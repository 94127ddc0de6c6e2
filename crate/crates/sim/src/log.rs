//! Per-step trajectory records and their CSV form.

use std::io;

use pursuit_core::{ControllerStatus, PathPoint, Pose2D, RegulationBreakdown, VelocityCommand};

/// Column order of the trajectory CSV.
pub const CSV_COLUMNS: [&str; 22] = [
    "step",
    "t",
    "x",
    "y",
    "theta",
    "v_cmd",
    "omega_cmd",
    "v",
    "omega",
    "status",
    "v_desired",
    "v_curvature",
    "v_proximity",
    "v_combined",
    "v_goal_scaled",
    "v_final",
    "kappa",
    "d_O",
    "lookahead_x",
    "lookahead_y",
    "lookahead_distance",
    "warnings",
];

/// One control cycle. `v` and `omega` are the velocities the base was
/// moving with when the command was computed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub t: f64,
    pub pose: Pose2D<f64>,
    pub command: VelocityCommand<f64>,
    pub v: f64,
    pub omega: f64,
    pub status: ControllerStatus,
    pub breakdown: RegulationBreakdown<f64>,
    pub d_o: f64,
    pub lookahead_point: Option<PathPoint<f64>>,
    pub lookahead_distance: f64,
    pub warnings: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryLog {
    pub records: Vec<TrajectoryRecord>,
}

impl TrajectoryLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TrajectoryRecord> {
        self.records.last()
    }

    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(CSV_COLUMNS)?;
        for r in &self.records {
            let (lx, ly) = r
                .lookahead_point
                .map_or((String::new(), String::new()), |p| (p.x.to_string(), p.y.to_string()));
            let b = &r.breakdown;
            out.write_record([
                r.step.to_string(),
                r.t.to_string(),
                r.pose.x.to_string(),
                r.pose.y.to_string(),
                r.pose.theta().to_string(),
                r.command.v.to_string(),
                r.command.omega.to_string(),
                r.v.to_string(),
                r.omega.to_string(),
                r.status.as_str().to_string(),
                b.v_desired.to_string(),
                b.v_curvature.to_string(),
                b.v_proximity.to_string(),
                b.v_combined.to_string(),
                b.v_goal_scaled.to_string(),
                b.v_final.to_string(),
                b.kappa.to_string(),
                r.d_o.to_string(),
                lx,
                ly,
                r.lookahead_distance.to_string(),
                r.warnings.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}
