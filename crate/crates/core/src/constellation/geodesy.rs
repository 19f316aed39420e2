//! WGS84 geodetic conversions and line-of-sight geometry.

use nalgebra::{Matrix3, Vector3};

use super::GeometryError;
use crate::constants::{WGS84_A, WGS84_E2};

/// Geodetic latitude, longitude [rad] and ellipsoidal height [m] from ECEF.
///
/// Bowring's iteration; converges to sub-millimeter in a few rounds for
/// terrestrial and orbital points alike.
pub fn ecef_to_geodetic(p: &Vector3<f64>) -> (f64, f64, f64) {
    let lon = p.y.atan2(p.x);
    let rho = (p.x * p.x + p.y * p.y).sqrt();
    if rho < 1e-9 {
        // On the polar axis.
        let lat = if p.z >= 0.0 {
            std::f64::consts::FRAC_PI_2
        } else {
            -std::f64::consts::FRAC_PI_2
        };
        let n = WGS84_A / (1.0 - WGS84_E2).sqrt();
        return (lat, lon, p.z.abs() - n * (1.0 - WGS84_E2));
    }
    let mut lat = (p.z / (rho * (1.0 - WGS84_E2))).atan();
    let mut h = 0.0;
    for _ in 0..6 {
        let sl = lat.sin();
        let n = WGS84_A / (1.0 - WGS84_E2 * sl * sl).sqrt();
        h = rho / lat.cos() - n;
        lat = (p.z / (rho * (1.0 - WGS84_E2 * n / (n + h)))).atan();
    }
    (lat, lon, h)
}

/// ECEF position from geodetic latitude, longitude [rad], height [m].
pub fn geodetic_to_ecef(lat: f64, lon: f64, h: f64) -> Vector3<f64> {
    let sl = lat.sin();
    let n = WGS84_A / (1.0 - WGS84_E2 * sl * sl).sqrt();
    Vector3::new(
        (n + h) * lat.cos() * lon.cos(),
        (n + h) * lat.cos() * lon.sin(),
        (n * (1.0 - WGS84_E2) + h) * sl,
    )
}

/// Rotation matrix whose rows are the local East/North/Up unit vectors in
/// ECEF, i.e. `enu = R * decef`.
pub fn enu_basis(lat: f64, lon: f64) -> Matrix3<f64> {
    let (sl, cl) = lat.sin_cos();
    let (so, co) = lon.sin_cos();
    Matrix3::new(
        -so, co, 0.0, //
        -sl * co, -sl * so, cl, //
        cl * co, cl * so, sl,
    )
}

/// Unit vector from the user toward the satellite.
pub fn los_unit_vector(
    user_pos: &Vector3<f64>,
    sat_pos: &Vector3<f64>,
) -> Result<Vector3<f64>, GeometryError> {
    let d = sat_pos - user_pos;
    let r = d.norm();
    if r <= 1e6 {
        return Err(GeometryError::CoincidentPoints(r));
    }
    Ok(d / r)
}

/// Elevation in [-pi/2, pi/2] and azimuth in [0, 2*pi), both with respect to
/// the geodetic local-level frame at the user position.
pub fn elevation_azimuth(
    user_pos: &Vector3<f64>,
    sat_pos: &Vector3<f64>,
) -> Result<(f64, f64), GeometryError> {
    let los = los_unit_vector(user_pos, sat_pos)?;
    let (lat, lon, _) = ecef_to_geodetic(user_pos);
    let enu = enu_basis(lat, lon) * los;
    let el = enu.z.clamp(-1.0, 1.0).asin();
    let mut az = enu.x.atan2(enu.y);
    if az < 0.0 {
        az += 2.0 * std::f64::consts::PI;
    }
    Ok((el, az))
}
