//! Planar poses, path points and frame transforms.
//!
//! Lengths are meters, angles radians and times seconds everywhere in the
//! crate. Headings are kept in `(-pi, pi]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("non-finite value where a finite one is required")]
    NonFinite,
}

/// Wraps `angle` into `(-pi, pi]`.
pub fn normalize_angle<S: Scalar>(angle: S) -> Result<S, GeometryError> {
    if !angle.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    let two_pi = S::TAU();
    // `%` keeps the sign of the dividend, so the remainder lies in (-2pi, 2pi).
    let mut wrapped = angle % two_pi;
    if wrapped > S::PI() {
        wrapped = wrapped - two_pi;
    } else if wrapped <= -S::PI() {
        wrapped = wrapped + two_pi;
    }
    Ok(wrapped)
}

/// A point of a reference path, or any planar point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct PathPoint<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> PathPoint<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(&self) -> S {
        self.x.hypot(self.y)
    }

    pub fn dot(&self, other: &Self) -> S {
        self.x * other.x + self.y * other.y
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.x - other.x, self.y - other.y)
    }
}

/// Euclidean distance between two points.
pub fn euclidean_distance<S: Scalar>(a: &PathPoint<S>, b: &PathPoint<S>) -> S {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Robot pose in the world frame. The heading is normalized on every
/// construction, so it is only reachable through [`Pose2D::theta`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", try_from = "RawPose<S>", into = "RawPose<S>")]
pub struct Pose2D<S: Scalar> {
    pub x: S,
    pub y: S,
    theta: S,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
struct RawPose<S> {
    x: S,
    y: S,
    theta: S,
}

impl<S: Scalar> TryFrom<RawPose<S>> for Pose2D<S> {
    type Error = GeometryError;

    fn try_from(raw: RawPose<S>) -> Result<Self, Self::Error> {
        Pose2D::try_new(raw.x, raw.y, raw.theta)
    }
}

impl<S: Scalar> From<Pose2D<S>> for RawPose<S> {
    fn from(pose: Pose2D<S>) -> Self {
        RawPose {
            x: pose.x,
            y: pose.y,
            theta: pose.theta,
        }
    }
}

impl<S: Scalar> Default for Pose2D<S> {
    fn default() -> Self {
        Self {
            x: S::zero(),
            y: S::zero(),
            theta: S::zero(),
        }
    }
}

impl<S: Scalar> Pose2D<S> {
    /// Builds a pose, wrapping the heading.
    ///
    /// # Panics
    ///
    /// Panics if any component is not finite; use [`Pose2D::try_new`] for
    /// untrusted input.
    pub fn new(x: S, y: S, theta: S) -> Self {
        Self::try_new(x, y, theta).expect("finite pose")
    }

    pub fn try_new(x: S, y: S, theta: S) -> Result<Self, GeometryError> {
        if !x.is_finite() || !y.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self {
            x,
            y,
            theta: normalize_angle(theta)?,
        })
    }

    pub fn theta(&self) -> S {
        self.theta
    }

    pub fn position(&self) -> PathPoint<S> {
        PathPoint::new(self.x, self.y)
    }

    /// Expresses a world-frame point in this pose's body frame.
    pub fn to_robot_frame(&self, point: &PathPoint<S>) -> PathPoint<S> {
        let (sin, cos) = self.theta.sin_cos();
        let dx = point.x - self.x;
        let dy = point.y - self.y;
        PathPoint::new(cos * dx + sin * dy, -sin * dx + cos * dy)
    }

    /// Inverse of [`Pose2D::to_robot_frame`].
    pub fn to_world_frame(&self, point: &PathPoint<S>) -> PathPoint<S> {
        let (sin, cos) = self.theta.sin_cos();
        PathPoint::new(
            self.x + cos * point.x - sin * point.y,
            self.y + sin * point.x + cos * point.y,
        )
    }
}

/// Free-function form of [`Pose2D::to_robot_frame`].
pub fn to_robot_frame<S: Scalar>(pose: &Pose2D<S>, point: &PathPoint<S>) -> PathPoint<S> {
    pose.to_robot_frame(point)
}

/// Linear and angular velocity sent to the base. Negative `v` drives backwards.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct VelocityCommand<S> {
    pub v: S,
    pub omega: S,
}

impl<S: Scalar> VelocityCommand<S> {
    pub fn new(v: S, omega: S) -> Self {
        Self { v, omega }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero())
    }
}
