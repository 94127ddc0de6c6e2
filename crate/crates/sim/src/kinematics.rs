//! Differential-drive plant: acceleration-limited linear speed, saturated
//! angular rate, exact unicycle integration.

use pursuit_core::{unicycle_motion, Pose2D, VelocityCommand};
use serde::{Deserialize, Serialize};

use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Control period in seconds.
    pub dt: f64,
    /// Linear acceleration limit in m/s^2, applied to speeding up and braking.
    pub a_max: f64,
    /// Runs longer than this many seconds end as a timeout.
    pub duration_limit: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            a_max: 0.2,
            duration_limit: 120.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = |name: &str, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(SimError::InvalidConfig(format!(
                    "{name} must be positive and finite, got {value}"
                )))
            }
        };
        positive("dt", self.dt)?;
        positive("a_max", self.a_max)?;
        positive("duration_limit", self.duration_limit)
    }

    /// Copy with the keys of a `[sim]` table replaced.
    pub fn with_overrides(&self, overrides: &toml::Table) -> Result<Self, SimError> {
        let mut table = toml::Table::try_from(self).expect("sim config serializes");
        for (key, value) in overrides {
            table.insert(key.clone(), value.clone());
        }
        let merged: Self = table
            .try_into()
            .map_err(|e: toml::de::Error| SimError::InvalidConfig(e.to_string()))?;
        merged.validate()?;
        Ok(merged)
    }
}

/// Pose plus the velocities the base is actually moving with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub pose: Pose2D<f64>,
    pub v: f64,
    pub omega: f64,
}

impl RobotState {
    pub fn at_rest(pose: Pose2D<f64>) -> Self {
        Self {
            pose,
            v: 0.0,
            omega: 0.0,
        }
    }
}

/// Advances the plant one period under `cmd`.
///
/// The achieved speed moves toward `cmd.v` by at most `a_max * dt` and lands
/// on it exactly once within reach. The angular rate is clamped, not
/// ramped.
pub fn step_kinematics(
    state: &RobotState,
    cmd: &VelocityCommand<f64>,
    dt: f64,
    a_max: f64,
    omega_max: f64,
) -> RobotState {
    let max_dv = a_max * dt;
    let dv = cmd.v - state.v;
    // The relative slack absorbs rounding so ramps end on the exact target.
    let v = if dv.abs() <= max_dv * (1.0 + 1e-9) {
        cmd.v
    } else {
        state.v + max_dv.copysign(dv)
    };
    let omega = cmd.omega.clamp(-omega_max, omega_max);
    RobotState {
        pose: unicycle_motion(&state.pose, v, omega, dt),
        v,
        omega,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn accelerates_from_rest_by_one_increment() {
        let s = RobotState::at_rest(Pose2D::new(0.0, 0.0, 0.0));
        let next = step_kinematics(&s, &VelocityCommand::new(0.8, 0.0), 0.05, 0.2, 3.2);
        assert_relative_eq!(next.v, 0.01, max_relative = 1e-12);
    }

    #[test]
    fn steady_state_advances_v_dt() {
        let s = RobotState {
            pose: Pose2D::new(0.0, 0.0, 0.0),
            v: 0.8,
            omega: 0.0,
        };
        let next = step_kinematics(&s, &VelocityCommand::new(0.8, 0.0), 0.05, 0.2, 3.2);
        assert_eq!(next.v, 0.8);
        assert_relative_eq!(next.pose.x, 0.04, max_relative = 1e-12);
        assert_eq!(next.pose.y, 0.0);
    }

    #[test]
    fn ramp_down_takes_one_second() {
        let mut s = RobotState {
            pose: Pose2D::new(0.0, 0.0, 0.0),
            v: 0.2,
            omega: 0.0,
        };
        let mut steps = 0;
        while s.v != 0.0 {
            s = step_kinematics(&s, &VelocityCommand::zero(), 0.05, 0.2, 3.2);
            steps += 1;
            assert!(steps <= 100);
        }
        assert_eq!(steps, 20);
        // Trapezoid: 0.2 m/s to rest over 1 s covers 0.1 m; the discrete
        // sum over steps ending at 0.19, ..., 0.0 gives 0.05 * 1.9 = 0.095.
        assert_relative_eq!(s.pose.x, 0.095, max_relative = 1e-9);
    }

    #[test]
    fn angular_rate_is_clamped() {
        let s = RobotState::at_rest(Pose2D::new(0.0, 0.0, 0.0));
        let next = step_kinematics(&s, &VelocityCommand::new(0.0, -9.0), 0.05, 0.2, 3.2);
        assert_eq!(next.omega, -3.2);
        assert_relative_eq!(next.pose.theta(), -0.16, max_relative = 1e-12);
    }

    #[test]
    fn sim_overrides_merge() {
        let table: toml::Table = toml::from_str("a_max = 0.5").unwrap();
        let merged = SimConfig::default().with_overrides(&table).unwrap();
        assert_eq!(merged.a_max, 0.5);
        assert_eq!(merged.dt, 0.05);
        let bad: toml::Table = toml::from_str("dt = -1.0").unwrap();
        assert!(SimConfig::default().with_overrides(&bad).is_err());
    }

    proptest! {
        #[test]
        fn plant_respects_limits(v0 in -0.8_f64..0.8, cv in -0.8_f64..0.8, cw in -10.0_f64..10.0, a in 0.05_f64..2.0) {
            let s = RobotState { pose: Pose2D::new(0.0, 0.0, 0.0), v: v0, omega: 0.0 };
            let next = step_kinematics(&s, &VelocityCommand::new(cv, cw), 0.05, a, 3.2);
            prop_assert!((next.v - v0).abs() <= a * 0.05 + 1e-12);
            prop_assert!(next.v.abs() <= 0.8);
            prop_assert!(next.omega.abs() <= 3.2);
            prop_assert!((next.v - cv).abs() <= (v0 - cv).abs());
        }
    }
}
