//! ECEF-frame strapdown inertial navigation.
//!
//! Two-sample coning/sculling compensation of the 100 Hz IMU stream, 50 Hz
//! mechanization with Coriolis and Somigliana gravity, and the zero-order-hold
//! interpolation used by the 200 Hz tracking epochs between INS updates.

mod earth;
mod increments;
mod mech;

pub use earth::{earth_rotation_matrix, gravity_ecef};
pub use increments::{coning_sculling, CompensatedImuIncrement};
pub use mech::{dr_interpolate, mechanize_step, InsState};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum InsError {
    #[error("IMU sample pair spacing {0} s is not the expected 0.01 s")]
    BadSampleSpacing(f64),
    #[error("position norm {0} m too small for the gravity model")]
    PositionTooLow(f64),
    #[error("non-finite value in mechanization input")]
    NonFinite,
    #[error("dead-reckoning hold queried at an INS update epoch (k = {0})")]
    HoldAtUpdateEpoch(u64),
}
