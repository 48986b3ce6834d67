use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// UAV fleet and support-vehicle parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FleetSpec {
    /// Number of UAVs, K.
    pub uav_count: usize,
    /// Flight time per battery, seconds.
    pub endurance: f64,
    /// Cruise speed, m/s.
    pub cruise_speed: f64,
    /// Spray swath width w, meters.
    pub coverage_width: f64,
    /// Maximum UAV-to-car link distance, meters.
    pub comm_radius: f64,
}

impl Default for FleetSpec {
    fn default() -> Self {
        FleetSpec {
            uav_count: 4,
            endurance: 600.0,
            cruise_speed: 6.0,
            coverage_width: 6.5,
            comm_radius: 500.0,
        }
    }
}

impl FleetSpec {
    /// Distance one battery lasts, D.
    pub fn battery_distance(&self) -> f64 {
        self.endurance * self.cruise_speed
    }

    /// Area one UAV sprays on one battery, A_max.
    pub fn max_area(&self) -> f64 {
        self.battery_distance() * self.coverage_width
    }

    pub fn validate(&self) -> Result<()> {
        if self.uav_count == 0 {
            return Err(Error::argument("uav_count must be at least 1"));
        }
        for (name, v) in [
            ("endurance", self.endurance),
            ("cruise_speed", self.cruise_speed),
            ("coverage_width", self.coverage_width),
            ("comm_radius", self.comm_radius),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::argument(format!("{name} must be positive and finite")));
            }
        }
        Ok(())
    }
}
