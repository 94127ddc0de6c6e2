//! Controller parameters.
//!
//! One parameter set drives all three tracker variants; `variant` selects
//! which of the lookahead and regulation stages are active. Defaults follow
//! a typical indoor service robot (0.8 m/s top speed, 0.25..1.2 m adaptive
//! lookahead over a 1.0 s lookahead time, 1.2 m fixed lookahead).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Pure Pursuit: fixed lookahead, constant speed.
    Pp,
    /// Adaptive Pure Pursuit: lookahead proportional to speed.
    App,
    /// Regulated Pure Pursuit: adaptive lookahead plus curvature and
    /// proximity speed regulation.
    Rpp,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Pp, Variant::App, Variant::Rpp];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Pp => "pp",
            Variant::App => "app",
            Variant::Rpp => "rpp",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pp" => Ok(Variant::Pp),
            "app" => Ok(Variant::App),
            "rpp" => Ok(Variant::Rpp),
            _ => Err(ConfigError::UnknownVariant(s.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown variant `{0}` (expected pp, app or rpp)")]
    UnknownVariant(String),
    #[error("invalid parameter `{name}`: {reason}")]
    Invalid { name: &'static str, reason: String },
    #[error("unknown parameter `{name}`; valid names: {}", ControllerConfig::<f64>::PARAM_NAMES.join(", "))]
    UnknownParam { name: String },
    #[error("malformed config document: {0}")]
    Parse(#[from] toml::de::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "S: Scalar")]
pub struct ControllerConfig<S> {
    pub variant: Variant,
    /// Cruise speed before regulation, m/s.
    pub v_desired: S,
    pub v_max: S,
    /// Lowest speed a moving command may carry, m/s.
    pub v_min_floor: S,
    pub omega_max: S,
    /// Seconds of travel the adaptive lookahead spans.
    pub lookahead_gain: S,
    pub lookahead_min: S,
    pub lookahead_max: S,
    /// Lookahead distance used by plain Pure Pursuit.
    pub fixed_lookahead: S,
    /// Turn radius below which the curvature regulation slows the robot.
    pub r_min: S,
    /// Proximity regulation gain, in (0, 1].
    pub alpha: S,
    /// Obstacle distance below which the proximity regulation engages.
    pub d_prox: S,
    pub use_interpolation: bool,
    /// Seconds of projected motion checked for collision every cycle.
    pub collision_horizon: S,
    pub use_collision_checking: bool,
    pub goal_xy_tolerance: S,
    pub goal_yaw_tolerance: S,
    /// Remaining path length below which speed is scaled down.
    pub slowdown_radius: S,
    pub use_rotate_to_heading: bool,
    pub rotate_to_heading_threshold: S,
    /// Proportional gain of in-place rotations, 1/s.
    pub rotate_to_heading_gain: S,
    pub allow_reversing: bool,
    pub robot_radius: S,
    /// Local window radius in multiples of the lookahead distance.
    pub far_prune_factor: S,
}

impl<S: Scalar> Default for ControllerConfig<S> {
    fn default() -> Self {
        let lit = S::lit;
        Self {
            variant: Variant::Rpp,
            v_desired: lit(0.8),
            v_max: lit(0.8),
            v_min_floor: lit(0.1),
            omega_max: lit(3.2),
            lookahead_gain: lit(1.0),
            lookahead_min: lit(0.25),
            lookahead_max: lit(1.2),
            fixed_lookahead: lit(1.2),
            r_min: lit(0.9),
            alpha: lit(1.0),
            d_prox: lit(0.6),
            use_interpolation: false,
            collision_horizon: lit(2.0),
            use_collision_checking: true,
            goal_xy_tolerance: lit(0.25),
            goal_yaw_tolerance: lit(0.25),
            slowdown_radius: lit(2.0),
            use_rotate_to_heading: true,
            rotate_to_heading_threshold: lit(0.785),
            rotate_to_heading_gain: lit(2.0),
            allow_reversing: false,
            robot_radius: lit(0.25),
            far_prune_factor: lit(2.0),
        }
    }
}

impl<S: Scalar> ControllerConfig<S> {
    /// Numeric fields addressable through [`ControllerConfig::set_param`].
    pub const PARAM_NAMES: [&'static str; 19] = [
        "v_desired",
        "v_max",
        "v_min_floor",
        "omega_max",
        "lookahead_gain",
        "lookahead_min",
        "lookahead_max",
        "fixed_lookahead",
        "r_min",
        "alpha",
        "d_prox",
        "collision_horizon",
        "goal_xy_tolerance",
        "goal_yaw_tolerance",
        "slowdown_radius",
        "rotate_to_heading_threshold",
        "rotate_to_heading_gain",
        "robot_radius",
        "far_prune_factor",
    ];

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    fn param_mut(&mut self, name: &str) -> Option<&mut S> {
        Some(match name {
            "v_desired" => &mut self.v_desired,
            "v_max" => &mut self.v_max,
            "v_min_floor" => &mut self.v_min_floor,
            "omega_max" => &mut self.omega_max,
            "lookahead_gain" => &mut self.lookahead_gain,
            "lookahead_min" => &mut self.lookahead_min,
            "lookahead_max" => &mut self.lookahead_max,
            "fixed_lookahead" => &mut self.fixed_lookahead,
            "r_min" => &mut self.r_min,
            "alpha" => &mut self.alpha,
            "d_prox" => &mut self.d_prox,
            "collision_horizon" => &mut self.collision_horizon,
            "goal_xy_tolerance" => &mut self.goal_xy_tolerance,
            "goal_yaw_tolerance" => &mut self.goal_yaw_tolerance,
            "slowdown_radius" => &mut self.slowdown_radius,
            "rotate_to_heading_threshold" => &mut self.rotate_to_heading_threshold,
            "rotate_to_heading_gain" => &mut self.rotate_to_heading_gain,
            "robot_radius" => &mut self.robot_radius,
            "far_prune_factor" => &mut self.far_prune_factor,
            _ => return None,
        })
    }

    pub fn param(&self, name: &str) -> Option<S> {
        self.clone().param_mut(name).map(|v| *v)
    }

    /// Sets a numeric field by name and re-validates the whole set.
    pub fn set_param(&mut self, name: &str, value: S) -> Result<(), ConfigError> {
        let mut next = self.clone();
        let slot = next
            .param_mut(name)
            .ok_or_else(|| ConfigError::UnknownParam { name: name.to_string() })?;
        *slot = value;
        next.validate()?;
        *self = next;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn invalid(name: &'static str, reason: impl Into<String>) -> ConfigError {
            ConfigError::Invalid {
                name,
                reason: reason.into(),
            }
        }
        for name in Self::PARAM_NAMES {
            let value = self.param(name).expect("listed parameter");
            if !value.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        let zero = S::zero();
        if self.v_min_floor <= zero {
            return Err(invalid("v_min_floor", "must be positive"));
        }
        if self.v_desired < self.v_min_floor {
            return Err(invalid("v_desired", "must be at least v_min_floor"));
        }
        if self.v_max < self.v_desired {
            return Err(invalid("v_max", "must be at least v_desired"));
        }
        if self.omega_max <= zero {
            return Err(invalid("omega_max", "must be positive"));
        }
        if self.lookahead_gain < zero {
            return Err(invalid("lookahead_gain", "must not be negative"));
        }
        if self.lookahead_min <= zero {
            return Err(invalid("lookahead_min", "must be positive"));
        }
        if self.lookahead_max < self.lookahead_min {
            return Err(invalid("lookahead_max", "must be at least lookahead_min"));
        }
        if self.fixed_lookahead <= zero {
            return Err(invalid("fixed_lookahead", "must be positive"));
        }
        if self.r_min <= zero {
            return Err(invalid("r_min", "must be positive"));
        }
        if self.alpha <= zero || self.alpha > S::one() {
            return Err(invalid("alpha", "must lie in (0, 1]"));
        }
        if self.d_prox <= zero {
            return Err(invalid("d_prox", "must be positive"));
        }
        if self.collision_horizon <= zero {
            return Err(invalid("collision_horizon", "must be positive"));
        }
        for (name, value) in [
            ("goal_xy_tolerance", self.goal_xy_tolerance),
            ("goal_yaw_tolerance", self.goal_yaw_tolerance),
            ("slowdown_radius", self.slowdown_radius),
            ("rotate_to_heading_threshold", self.rotate_to_heading_threshold),
            ("rotate_to_heading_gain", self.rotate_to_heading_gain),
            ("robot_radius", self.robot_radius),
        ] {
            if value < zero {
                return Err(invalid(name, "must not be negative"));
            }
        }
        if self.far_prune_factor < S::one() {
            return Err(invalid("far_prune_factor", "must be at least 1"));
        }
        Ok(())
    }

    /// Reads the `[controller]` table of a TOML document. Other tables are
    /// ignored; missing fields keep their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        #[derive(Deserialize)]
        #[serde(bound = "S: Scalar")]
        struct Document<S> {
            #[serde(default = "ControllerConfig::default")]
            controller: ControllerConfig<S>,
        }
        let doc: Document<S> = toml::from_str(text)?;
        doc.controller.validate()?;
        Ok(doc.controller)
    }

    /// Returns a copy with the keys of `overrides` (a `[controller]` table
    /// body) replacing the current values. Unlisted keys keep their value.
    pub fn with_overrides(&self, overrides: &toml::Table) -> Result<Self, ConfigError> {
        let mut table = toml::Table::try_from(self).expect("config serializes");
        for (key, value) in overrides {
            table.insert(key.clone(), value.clone());
        }
        let merged: Self = table.try_into()?;
        merged.validate()?;
        Ok(merged)
    }

    /// Renders the configuration as a `[controller]` TOML table.
    pub fn to_toml_string(&self) -> String {
        #[derive(Serialize)]
        #[serde(bound = "S: Scalar")]
        struct Document<'a, S> {
            controller: &'a ControllerConfig<S>,
        }
        toml::to_string(&Document { controller: self }).expect("config serializes")
    }
}
