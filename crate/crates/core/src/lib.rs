//! Multi-UAV coverage planning with a ground support vehicle.
//!
//! The pipeline splits farmland into sub-areas, lays closed coverage trails in
//! each, assigns trails to UAVs, refines where each UAV enters its trails, and
//! routes the car that launches and recovers the fleet.

pub mod error;
pub mod geometry;

pub use error::{Error, Result, Stage};
pub mod fleet;
pub mod ga;
pub mod partition;

pub use fleet::FleetSpec;
pub use ga::GaParams;
pub mod trails;
pub mod assignment;
pub mod access_opt;
pub mod routing;
pub mod pipeline;
