//! Occupancy grid world model, exact Euclidean distance field, constant
//! curvature motion projection and the temporal collision check.

use std::cmp::Ordering;
use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{PathPoint, Pose2D};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CollisionError {
    #[error("point ({x:.3}, {y:.3}) lies outside the grid")]
    OutOfBounds { x: f64, y: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid text line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Placement and size of an axis-aligned grid. `origin` is the outer corner
/// of cell (0, 0), which is the minimum-x, minimum-y cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry<S> {
    pub width: usize,
    pub height: usize,
    pub resolution: S,
    pub origin: PathPoint<S>,
}

impl<S: Scalar> GridGeometry<S> {
    pub fn new(width: usize, height: usize, resolution: S, origin: PathPoint<S>) -> Result<Self, CollisionError> {
        if width == 0 || height == 0 {
            return Err(CollisionError::InvalidGrid("grid must have at least one cell".into()));
        }
        if !resolution.is_finite() || resolution <= S::zero() {
            return Err(CollisionError::InvalidGrid("resolution must be positive".into()));
        }
        if !origin.is_finite() {
            return Err(CollisionError::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    /// Cell containing `point`, or `None` outside the grid.
    pub fn cell_of(&self, point: &PathPoint<S>) -> Option<(usize, usize)> {
        let fx = ((point.x - self.origin.x) / self.resolution).floor();
        let fy = ((point.y - self.origin.y) / self.resolution).floor();
        if !(fx >= S::zero() && fy >= S::zero()) {
            return None;
        }
        let (col, row) = (fx.to_usize()?, fy.to_usize()?);
        (col < self.width && row < self.height).then_some((col, row))
    }

    pub fn cell_center(&self, col: usize, row: usize) -> PathPoint<S> {
        let half = S::half();
        PathPoint::new(
            self.origin.x + (S::from_usize(col).expect("cell index") + half) * self.resolution,
            self.origin.y + (S::from_usize(row).expect("cell index") + half) * self.resolution,
        )
    }

    /// Signed distance from `point` to the nearest grid edge; negative
    /// outside the grid.
    pub fn distance_to_edge(&self, point: &PathPoint<S>) -> S {
        let max_x = self.origin.x + S::from_usize(self.width).expect("width") * self.resolution;
        let max_y = self.origin.y + S::from_usize(self.height).expect("height") * self.resolution;
        (point.x - self.origin.x)
            .min(max_x - point.x)
            .min(point.y - self.origin.y)
            .min(max_y - point.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid<S> {
    geometry: GridGeometry<S>,
    occupied: Vec<bool>,
}

impl<S: Scalar> OccupancyGrid<S> {
    /// An all-free grid.
    pub fn new(geometry: GridGeometry<S>) -> Self {
        Self {
            occupied: vec![false; geometry.cell_count()],
            geometry,
        }
    }

    pub fn geometry(&self) -> &GridGeometry<S> {
        &self.geometry
    }

    pub fn width(&self) -> usize {
        self.geometry.width
    }

    pub fn height(&self) -> usize {
        self.geometry.height
    }

    pub fn resolution(&self) -> S {
        self.geometry.resolution
    }

    pub fn is_occupied(&self, col: usize, row: usize) -> bool {
        self.occupied[self.geometry.index(col, row)]
    }

    pub fn set_occupied(&mut self, col: usize, row: usize, value: bool) {
        let i = self.geometry.index(col, row);
        self.occupied[i] = value;
    }

    /// Occupancy at a world point; outside the grid counts as occupied.
    pub fn is_occupied_at(&self, point: &PathPoint<S>) -> bool {
        self.geometry.cell_of(point).is_none_or(|(c, r)| self.is_occupied(c, r))
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    /// Marks every cell whose center lies inside the axis-aligned rectangle
    /// spanned by `a` and `b`. Returns the number of cells that changed.
    pub fn fill_rect(&mut self, a: &PathPoint<S>, b: &PathPoint<S>) -> usize {
        let (lo_x, hi_x) = (a.x.min(b.x), a.x.max(b.x));
        let (lo_y, hi_y) = (a.y.min(b.y), a.y.max(b.y));
        let mut changed = 0;
        for row in 0..self.geometry.height {
            for col in 0..self.geometry.width {
                let c = self.geometry.cell_center(col, row);
                if c.x >= lo_x && c.x <= hi_x && c.y >= lo_y && c.y <= hi_y && !self.is_occupied(col, row) {
                    self.set_occupied(col, row, true);
                    changed += 1;
                }
            }
        }
        changed
    }

    /// Parses the text map format: `resolution <m>`, `origin <x> <y>`, then
    /// one line per row from the maximum-y row down, `#` occupied, `.` free.
    pub fn from_text(text: &str) -> Result<Self, CollisionError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let parse_err = |line: usize, reason: &str| CollisionError::Parse {
            line: line + 1,
            reason: reason.to_string(),
        };
        let parse_num = |line: usize, tok: Option<&str>| -> Result<S, CollisionError> {
            tok.and_then(|t| t.parse::<f64>().ok())
                .and_then(S::from_f64)
                .ok_or_else(|| parse_err(line, "expected a number"))
        };

        let (ln, header) = lines.next().ok_or_else(|| parse_err(0, "missing resolution line"))?;
        let mut toks = header.split_whitespace();
        if toks.next() != Some("resolution") {
            return Err(parse_err(ln, "expected `resolution <meters>`"));
        }
        let resolution = parse_num(ln, toks.next())?;

        let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "missing origin line"))?;
        let mut toks = header.split_whitespace();
        if toks.next() != Some("origin") {
            return Err(parse_err(ln, "expected `origin <x> <y>`"));
        }
        let origin = PathPoint::new(parse_num(ln, toks.next())?, parse_num(ln, toks.next())?);

        let mut rows: Vec<Vec<bool>> = Vec::new();
        for (ln, line) in lines {
            let row = line
                .trim()
                .chars()
                .map(|c| match c {
                    '#' => Ok(true),
                    '.' => Ok(false),
                    other => Err(parse_err(ln, &format!("unexpected cell character `{other}`"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(parse_err(ln, "row width differs from the first row"));
                }
            }
            rows.push(row);
        }
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        let geometry = GridGeometry::new(width, height, resolution, origin)?;
        let mut grid = Self::new(geometry);
        for (text_row, cells) in rows.iter().enumerate() {
            let row = height - 1 - text_row;
            for (col, &occ) in cells.iter().enumerate() {
                grid.set_occupied(col, row, occ);
            }
        }
        Ok(grid)
    }

    pub fn to_text(&self) -> String {
        let g = &self.geometry;
        let mut out = String::with_capacity((g.width + 1) * g.height + 64);
        writeln!(out, "resolution {}", g.resolution).unwrap();
        writeln!(out, "origin {} {}", g.origin.x, g.origin.y).unwrap();
        for row in (0..g.height).rev() {
            for col in 0..g.width {
                out.push(if self.is_occupied(col, row) { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }
}

/// Per-cell Euclidean distance (cell centers, meters) to the nearest
/// occupied cell. Cells of a grid with no obstacles hold `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField<S> {
    geometry: GridGeometry<S>,
    distance: Vec<S>,
}

impl<S: Scalar> DistanceField<S> {
    pub fn geometry(&self) -> &GridGeometry<S> {
        &self.geometry
    }

    pub fn at_cell(&self, col: usize, row: usize) -> S {
        self.distance[self.geometry.index(col, row)]
    }

    /// Distance stored for the cell containing `point`.
    pub fn at_point(&self, point: &PathPoint<S>) -> Result<S, CollisionError> {
        self.geometry
            .cell_of(point)
            .map(|(c, r)| self.at_cell(c, r))
            .ok_or_else(|| CollisionError::OutOfBounds {
                x: point.x.to_f64().unwrap_or(f64::NAN),
                y: point.y.to_f64().unwrap_or(f64::NAN),
            })
    }
}

/// Left edge of a lower-envelope parabola, as an exact fraction.
#[derive(Debug, Clone, Copy)]
enum Edge {
    NegInf,
    At { num: i64, den: i64 },
}

impl Edge {
    fn cmp_point(&self, num: i64, den: i64) -> Ordering {
        match *self {
            Edge::NegInf => Ordering::Less,
            Edge::At { num: a, den: b } => (i128::from(a) * i128::from(den)).cmp(&(i128::from(num) * i128::from(b))),
        }
    }
}

/// Exact 1D squared distance transform over sampled parabolas
/// (Felzenszwalb-Huttenlocher) in integer arithmetic. `None` marks an
/// unbounded sample.
fn squared_edt_1d(f: &[Option<i64>], out: &mut [Option<i64>], hull: &mut Vec<usize>, edges: &mut Vec<Edge>) {
    hull.clear();
    edges.clear();
    for (q, fq) in f.iter().enumerate() {
        let Some(fq) = *fq else { continue };
        let q_i = q as i64;
        loop {
            match hull.last() {
                None => {
                    hull.push(q);
                    edges.push(Edge::NegInf);
                    break;
                }
                Some(&p) => {
                    let p_i = p as i64;
                    let fp = f[p].expect("hull holds finite samples");
                    let num = (fq + q_i * q_i) - (fp + p_i * p_i);
                    let den = 2 * (q_i - p_i);
                    let last = *edges.last().expect("edge per hull entry");
                    if last.cmp_point(num, den) != Ordering::Less {
                        hull.pop();
                        edges.pop();
                        continue;
                    }
                    hull.push(q);
                    edges.push(Edge::At { num, den });
                    break;
                }
            }
        }
    }
    if hull.is_empty() {
        out.iter_mut().for_each(|o| *o = None);
        return;
    }
    let mut k = 0;
    for (p, o) in out.iter_mut().enumerate() {
        let p_i = p as i64;
        while k + 1 < hull.len() && edges[k + 1].cmp_point(p_i, 1) == Ordering::Less {
            k += 1;
        }
        let v = hull[k] as i64;
        *o = Some((p_i - v) * (p_i - v) + f[hull[k]].expect("finite"));
    }
}

/// Exact Euclidean distance transform of `grid`, in meters between cell
/// centers.
pub fn compute_distance_field<S: Scalar>(grid: &OccupancyGrid<S>) -> DistanceField<S> {
    let g = *grid.geometry();
    let (w, h) = (g.width, g.height);
    let mut columns = vec![None; w * h];
    let mut hull = Vec::with_capacity(w.max(h));
    let mut edges = Vec::with_capacity(w.max(h));

    let mut input = vec![None; h];
    let mut output = vec![None; h];
    for col in 0..w {
        for (row, slot) in input.iter_mut().enumerate() {
            *slot = grid.is_occupied(col, row).then_some(0_i64);
        }
        squared_edt_1d(&input, &mut output, &mut hull, &mut edges);
        for row in 0..h {
            columns[g.index(col, row)] = output[row];
        }
    }

    let mut squared = vec![None; w * h];
    let mut input = vec![None; w];
    let mut output = vec![None; w];
    for row in 0..h {
        input.copy_from_slice(&columns[row * w..(row + 1) * w]);
        squared_edt_1d(&input, &mut output, &mut hull, &mut edges);
        squared[row * w..(row + 1) * w].copy_from_slice(&output);
    }

    let distance = squared
        .into_iter()
        .map(|d| match d {
            Some(sq) => S::from_i64(sq).expect("squared cell distance").sqrt() * g.resolution,
            None => S::infinity(),
        })
        .collect();
    DistanceField { geometry: g, distance }
}

/// Distance from the robot center to the nearest obstacle, read from the
/// cell containing the pose.
pub fn distance_to_obstacle<S: Scalar>(field: &DistanceField<S>, pose: &Pose2D<S>) -> Result<S, CollisionError> {
    field.at_point(&pose.position())
}

/// Exact unicycle motion under constant `v` and `omega` for `t` seconds.
pub fn unicycle_motion<S: Scalar>(pose: &Pose2D<S>, v: S, omega: S, t: S) -> Pose2D<S> {
    let theta = pose.theta();
    if omega.abs() < S::lit(1e-9) {
        let (sin, cos) = theta.sin_cos();
        return Pose2D::new(pose.x + v * t * cos, pose.y + v * t * sin, theta + omega * t);
    }
    let r = v / omega;
    let end = theta + omega * t;
    Pose2D::new(
        pose.x + r * (end.sin() - theta.sin()),
        pose.y - r * (end.cos() - theta.cos()),
        end,
    )
}

/// Poses along a projected constant-curvature motion.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcProjection<S: Scalar> {
    pub poses: Vec<Pose2D<S>>,
    pub timestamps: Vec<S>,
    /// Arc length between consecutive samples, meters.
    pub spacing: S,
}

/// Samples the motion `(v, omega)` from `pose` over `horizon` seconds,
/// starting with the current pose. Samples are close enough that neither
/// the center (moves at most `resolution`) nor the rim of a disc of
/// `robot_radius` (turns at most `resolution / robot_radius` radians) skips
/// a cell between samples.
pub fn project_arc<S: Scalar>(
    pose: &Pose2D<S>,
    v: S,
    omega: S,
    horizon: S,
    resolution: S,
    robot_radius: S,
) -> ArcProjection<S> {
    let sweep_speed = v.abs().max(omega.abs() * robot_radius);
    let steps = (horizon * sweep_speed / resolution).ceil().max(S::one());
    let n = steps.to_usize().expect("finite sample count");
    let dt = horizon / steps;
    let mut poses = Vec::with_capacity(n + 1);
    let mut timestamps = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = if i == n {
            horizon
        } else {
            S::from_usize(i).expect("sample index") * dt
        };
        poses.push(unicycle_motion(pose, v, omega, t));
        timestamps.push(t);
    }
    ArcProjection {
        poses,
        timestamps,
        spacing: v.abs() * dt,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionCheck<S> {
    /// Time of the first sample closer than the robot radius to an obstacle.
    pub time_to_collision: Option<S>,
    /// Set when the projection left the grid; the exit sample counts as a
    /// collision.
    pub left_grid: bool,
}

/// Walks the projection and reports the first sample whose obstacle
/// distance is below `robot_radius`.
pub fn check_collision<S: Scalar>(
    field: &DistanceField<S>,
    arc: &ArcProjection<S>,
    robot_radius: S,
) -> CollisionCheck<S> {
    for (pose, &t) in arc.poses.iter().zip(&arc.timestamps) {
        match distance_to_obstacle(field, pose) {
            Ok(d) if d < robot_radius => {
                return CollisionCheck {
                    time_to_collision: Some(t),
                    left_grid: false,
                }
            }
            Ok(_) => {}
            Err(_) => {
                log::warn!(
                    "projected motion leaves the world model at t={t}; treating it as a collision, \
                     lower the speed or the collision horizon, or enlarge the map"
                );
                return CollisionCheck {
                    time_to_collision: Some(t),
                    left_grid: true,
                };
            }
        }
    }
    CollisionCheck {
        time_to_collision: None,
        left_grid: false,
    }
}

/// The collision horizon at speed `v` reaches past the edge of the world
/// model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollingWindowWarning<S> {
    /// Distance covered within the horizon.
    pub reach: S,
    /// Distance from the robot to the nearest grid edge.
    pub margin: S,
}

pub fn rolling_window_guard<S: Scalar>(
    v: S,
    horizon: S,
    pose: &Pose2D<S>,
    geometry: &GridGeometry<S>,
) -> Option<RollingWindowWarning<S>> {
    let reach = v.abs() * horizon;
    let margin = geometry.distance_to_edge(&pose.position());
    (reach > margin).then_some(RollingWindowWarning { reach, margin })
}
