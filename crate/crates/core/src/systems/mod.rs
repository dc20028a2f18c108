//! The two worked examples and their supporting numerics.

pub mod attitude;
pub mod cwh;
pub mod linalg;
pub mod theta;

pub use attitude::{build_attitude_system, AttitudeConfig, AttitudeDynamics};
pub use cwh::{build_cwh_system, cwh_closed_loop, CwhClosedLoop, CwhConfig};
pub use theta::project_theta;
