//! Earth rotation and gravity utilities.

use nalgebra::{Matrix3, Vector3};

use super::InsError;
use crate::constants::{
    GRAVITY_EQUATOR, GRAVITY_POLE, OMEGA_IE, WGS84_A, WGS84_E2, WGS84_F, WGS84_MU,
};
use crate::constellation::{ecef_to_geodetic, enu_basis};

/// Somigliana constant (b*gp - a*ge)/(a*ge).
const SOMIGLIANA_K: f64 = 1.931_852_652_41e-3;

/// m = omega^2 a^2 b / GM.
const GRAV_M: f64 = OMEGA_IE * OMEGA_IE * WGS84_A * WGS84_A * (1.0 - WGS84_F) * WGS84_A / WGS84_MU;

/// Rotation from ECI to ECEF accumulated over `dt` seconds.
pub fn earth_rotation_matrix(dt: f64) -> Matrix3<f64> {
    let (s, c) = (OMEGA_IE * dt).sin_cos();
    Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Plumb-bob gravity (gravitation plus centrifugal) in the ECEF frame.
///
/// Somigliana normal gravity on the ellipsoid with the standard height
/// correction, directed along geodetic down.
pub fn gravity_ecef(p: &Vector3<f64>) -> Result<Vector3<f64>, InsError> {
    let r = p.norm();
    if r <= 6.2e6 {
        return Err(InsError::PositionTooLow(r));
    }
    let (lat, lon, h) = ecef_to_geodetic(p);
    let s2 = lat.sin() * lat.sin();
    let g0 = GRAVITY_EQUATOR * (1.0 + SOMIGLIANA_K * s2) / (1.0 - WGS84_E2 * s2).sqrt();
    let gh = g0
        * (1.0 - 2.0 * h / WGS84_A * (1.0 + WGS84_F + GRAV_M - 2.0 * WGS84_F * s2)
            + 3.0 * h * h / (WGS84_A * WGS84_A));
    let down = -(enu_basis(lat, lon).transpose() * Vector3::new(0.0, 0.0, 1.0));
    Ok(down * gh)
}

/// Earth rotation rate as an ECEF vector.
pub fn omega_ie_vec() -> Vector3<f64> {
    Vector3::new(0.0, 0.0, OMEGA_IE)
}

#[allow(dead_code)]
fn _check_pole_constant() {
    // GRAVITY_POLE is only asserted in tests but kept here so the constant
    // pair stays together.
    let _ = GRAVITY_POLE;
}
