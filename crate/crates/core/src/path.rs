//! Stored reference path and the per-cycle path processing: closest point
//! search, pruning, the robot-frame local window, lookahead selection and
//! cusp detection.

use std::io;
use std::path::Path as FsPath;

use thiserror::Error;

use crate::config::{ControllerConfig, Variant};
use crate::geometry::{euclidean_distance, PathPoint, Pose2D};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum PathError {
    #[error("a path needs at least one point")]
    Empty,
    #[error("path point {index} is not finite")]
    NonFinite { index: usize },
    #[error("no live path points remain")]
    NoValidPath,
    #[error("prune cursor cannot move back from {current} to {requested}")]
    CursorRegression { current: usize, requested: usize },
    #[error("index {index} is outside a path of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("path csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("path file {path}: {source}")]
    Io { path: String, source: io::Error },
}

/// Ordered reference path plus the cursor of the first point not yet passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Path<S> {
    points: Vec<PathPoint<S>>,
    /// cumulative[i] is the arc length from points[0] to points[i].
    cumulative: Vec<S>,
    prune_cursor: usize,
}

impl<S: Scalar> Path<S> {
    pub fn new(points: Vec<PathPoint<S>>) -> Result<Self, PathError> {
        if points.is_empty() {
            return Err(PathError::Empty);
        }
        if let Some(index) = points.iter().position(|p| !p.is_finite()) {
            return Err(PathError::NonFinite { index });
        }
        let mut cumulative = Vec::with_capacity(points.len());
        let mut acc = S::zero();
        cumulative.push(acc);
        for pair in points.windows(2) {
            acc = acc + euclidean_distance(&pair[0], &pair[1]);
            cumulative.push(acc);
        }
        Ok(Self {
            points,
            cumulative,
            prune_cursor: 0,
        })
    }

    pub fn points(&self) -> &[PathPoint<S>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn prune_cursor(&self) -> usize {
        self.prune_cursor
    }

    /// Points from the prune cursor to the end.
    pub fn live(&self) -> &[PathPoint<S>] {
        &self.points[self.prune_cursor..]
    }

    pub fn goal(&self) -> PathPoint<S> {
        *self.points.last().expect("non-empty path")
    }

    pub fn total_length(&self) -> S {
        *self.cumulative.last().expect("non-empty path")
    }

    /// Arc length from `index` to the final point.
    pub fn remaining_length(&self, index: usize) -> S {
        self.total_length() - self.cumulative[index.min(self.points.len() - 1)]
    }

    /// Heading of the final non-degenerate segment, or `None` for a path
    /// whose points all coincide.
    pub fn final_heading(&self) -> Option<S> {
        self.points.windows(2).rev().find_map(|pair| {
            let d = pair[1].sub(&pair[0]);
            (d.norm() > S::zero()).then(|| d.y.atan2(d.x))
        })
    }

    /// Advances the prune cursor to `closest_index`. Points before it are
    /// never considered again for the lifetime of this path.
    pub fn prune_passed(&mut self, closest_index: usize) -> Result<(), PathError> {
        if closest_index >= self.points.len() {
            return Err(PathError::IndexOutOfRange {
                index: closest_index,
                len: self.points.len(),
            });
        }
        if closest_index < self.prune_cursor {
            return Err(PathError::CursorRegression {
                current: self.prune_cursor,
                requested: closest_index,
            });
        }
        self.prune_cursor = closest_index;
        Ok(())
    }

    /// Reads a `x,y` CSV document, one point per row in path order.
    pub fn from_csv_reader<R: io::Read>(reader: R) -> Result<Self, PathError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let points = rdr.deserialize::<PathPoint<S>>().collect::<Result<Vec<_>, _>>()?;
        Self::new(points)
    }

    pub fn from_csv_file(path: impl AsRef<FsPath>) -> Result<Self, PathError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| PathError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_reader(io::BufReader::new(file))
    }

    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<(), PathError> {
        let mut wtr = csv::Writer::from_writer(writer);
        for p in &self.points {
            wtr.serialize(p)?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Index of the live point closest to the robot; ties go to the lowest index.
pub fn find_closest_index<S: Scalar>(path: &Path<S>, pose: &Pose2D<S>) -> Result<usize, PathError> {
    let robot = pose.position();
    let mut best: Option<(usize, S)> = None;
    for (offset, p) in path.live().iter().enumerate() {
        let d = euclidean_distance(&robot, p);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((path.prune_cursor + offset, d));
        }
    }
    best.map(|(i, _)| i).ok_or(PathError::NoValidPath)
}

/// Robot-frame window of the stored path starting at the closest point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPathView<S> {
    pub points: Vec<PathPoint<S>>,
    /// Index into the stored path for each view point. A point clipped onto
    /// the window boundary reports the index of the segment's far end.
    pub source_indices: Vec<usize>,
}

impl<S: Scalar> LocalPathView<S> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Arc length along the view polyline.
    pub fn arc_length(&self) -> S {
        self.points
            .windows(2)
            .fold(S::zero(), |acc, w| acc + euclidean_distance(&w[0], &w[1]))
    }
}

/// Parameter `t` in `[0, 1]` where the segment `a -> b` leaves the circle of
/// `radius` about `center`, given `a` inside and `b` on or outside it.
fn circle_exit<S: Scalar>(center: &PathPoint<S>, a: &PathPoint<S>, b: &PathPoint<S>, radius: S) -> S {
    let d = b.sub(a);
    let f = a.sub(center);
    let qa = d.dot(&d);
    if qa == S::zero() {
        return S::one();
    }
    let qb = S::two() * f.dot(&d);
    let qc = f.dot(&f) - radius * radius;
    let disc = (qb * qb - S::lit(4.0) * qa * qc).max(S::zero());
    let t = (-qb + disc.sqrt()) / (S::two() * qa);
    t.max(S::zero()).min(S::one())
}

fn lerp<S: Scalar>(a: &PathPoint<S>, b: &PathPoint<S>, t: S) -> PathPoint<S> {
    PathPoint::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
}

/// Transforms the contiguous run of points within `far_prune_factor *
/// lookahead` of the closest point into the robot frame. The segment that
/// crosses the window boundary is clipped onto it, so the run never loses
/// the geometry between the last inner point and the boundary. The stored
/// path is not modified.
pub fn build_local_view<S: Scalar>(
    path: &Path<S>,
    pose: &Pose2D<S>,
    lookahead: S,
    far_prune_factor: S,
) -> LocalPathView<S> {
    let radius = far_prune_factor * lookahead;
    let start = path.prune_cursor();
    let anchor = path.points()[start];
    let mut view = LocalPathView {
        points: vec![pose.to_robot_frame(&anchor)],
        source_indices: vec![start],
    };
    for i in start + 1..path.len() {
        let p = path.points()[i];
        if euclidean_distance(&anchor, &p) <= radius {
            view.points.push(pose.to_robot_frame(&p));
            view.source_indices.push(i);
        } else {
            let prev = path.points()[i - 1];
            let t = circle_exit(&anchor, &prev, &p, radius);
            let clipped = lerp(&prev, &p, t);
            if euclidean_distance(&clipped, &prev) > S::zero() {
                view.points.push(pose.to_robot_frame(&clipped));
                view.source_indices.push(i);
            }
            break;
        }
    }
    view
}

/// Lookahead distance for the given speed magnitude.
pub fn lookahead_distance<S: Scalar>(variant: Variant, speed: S, cfg: &ControllerConfig<S>) -> S {
    match variant {
        Variant::Pp => cfg.fixed_lookahead,
        Variant::App | Variant::Rpp => (speed.abs() * cfg.lookahead_gain)
            .max(cfg.lookahead_min)
            .min(cfg.lookahead_max),
    }
}

/// First view point at least `lookahead` from the view's first point, or
/// with interpolation the exact crossing of that distance. Falls back to the
/// last point when the whole view is closer than `lookahead`.
pub fn select_lookahead_point<S: Scalar>(
    view: &LocalPathView<S>,
    lookahead: S,
    use_interpolation: bool,
) -> PathPoint<S> {
    let anchor = view.points[0];
    for i in 1..view.points.len() {
        let p = view.points[i];
        if euclidean_distance(&anchor, &p) >= lookahead {
            if !use_interpolation {
                return p;
            }
            let prev = view.points[i - 1];
            return lerp(&prev, &p, circle_exit(&anchor, &prev, &p, lookahead));
        }
    }
    *view.points.last().expect("non-empty view")
}

/// First direction reversal along a view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspInfo<S> {
    /// Index of the reversal point within the view.
    pub view_index: usize,
    /// Arc length from the view's first point to the reversal point.
    pub arc_distance: S,
}

/// Finds the first point where consecutive segments point into opposite
/// half-planes (strictly negative dot product). Zero-length segments are
/// skipped; a right angle is not a reversal.
pub fn detect_cusp<S: Scalar>(view: &LocalPathView<S>) -> Option<CuspInfo<S>> {
    let mut arc = S::zero();
    let mut previous: Option<PathPoint<S>> = None;
    for k in 1..view.points.len() {
        let seg = view.points[k].sub(&view.points[k - 1]);
        let len = seg.norm();
        if len == S::zero() {
            continue;
        }
        if let Some(prev) = previous {
            if prev.dot(&seg) < S::zero() {
                return Some(CuspInfo {
                    view_index: k - 1,
                    arc_distance: arc,
                });
            }
        }
        arc = arc + len;
        previous = Some(seg);
    }
    None
}
