//! Satellite states, line-of-sight geometry, and atmospheric delay models.
//!
//! Everything here is pure: the simulator and the receiver-side predictors call
//! the same functions, so modeled effects cancel exactly when the receiver is
//! fed perfect estimates.

mod atmosphere;
mod ephemeris;
mod geodesy;

pub use atmosphere::AtmosphereModel;
pub use ephemeris::{OrbitElements, SatClockModel, SatelliteState, SyntheticEphemeris};
pub use geodesy::{
    ecef_to_geodetic, elevation_azimuth, enu_basis, geodetic_to_ecef, los_unit_vector,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("unknown PRN {0} in ephemeris")]
    UnknownPrn(u8),
    #[error("user and satellite positions are too close ({0} m apart)")]
    CoincidentPoints(f64),
    #[error("satellite below horizon (elevation {0:.4} rad)")]
    BelowHorizon(f64),
}
