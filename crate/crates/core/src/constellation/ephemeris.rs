//! Synthetic circular-orbit ephemeris.
//!
//! Each PRN gets a circular two-body orbit (semi-major axis, inclination,
//! RAAN, argument of latitude at the reference epoch) plus a linear clock
//! polynomial. Position and velocity are analytic, so oracle tests can check
//! them independently and the simulator stays bit-reproducible.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::constants::{OMEGA_IE, WGS84_MU};

/// Position/velocity/clock of one satellite at an epoch, in ECEF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteState {
    pub prn: u8,
    pub pos_ecef: Vector3<f64>,
    pub vel_ecef: Vector3<f64>,
    /// Clock bias [s], positive when the satellite clock runs ahead.
    pub clock_bias: f64,
    /// Clock drift [s/s].
    pub clock_drift: f64,
}

/// Linear satellite clock polynomial.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SatClockModel {
    /// Bias at the reference epoch [s].
    pub a0: f64,
    /// Drift [s/s].
    pub a1: f64,
}

impl Default for SatClockModel {
    fn default() -> Self {
        Self { a0: 0.0, a1: 0.0 }
    }
}

/// Circular-orbit elements for one PRN.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct OrbitElements {
    pub prn: u8,
    /// Semi-major axis [m].
    pub semi_major_axis: f64,
    /// Inclination [rad].
    pub inclination: f64,
    /// Right ascension of the ascending node at the reference epoch [rad].
    pub raan: f64,
    /// Argument of latitude at the reference epoch [rad].
    pub arg_latitude: f64,
    #[serde(default)]
    pub clock: SatClockModel,
}

/// Earth rotation matrix from ECI to ECEF for a rotation angle `theta` [rad].
fn r3(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0)
}

impl OrbitElements {
    /// Mean motion [rad/s].
    pub fn mean_motion(&self) -> f64 {
        (WGS84_MU / self.semi_major_axis.powi(3)).sqrt()
    }

    /// Orbital period [s].
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.mean_motion()
    }

    /// Inertial position and velocity at time `t` given the element reference
    /// epoch `t_ref`.
    fn eci_state(&self, t: f64, t_ref: f64) -> (Vector3<f64>, Vector3<f64>) {
        let u = self.arg_latitude + self.mean_motion() * (t - t_ref);
        let (su, cu) = u.sin_cos();
        let a = self.semi_major_axis;
        let v = a * self.mean_motion();
        let in_plane_p = Vector3::new(a * cu, a * su, 0.0);
        let in_plane_v = Vector3::new(-v * su, v * cu, 0.0);
        // Perifocal -> inertial: R3(-raan) * R1(-inc).
        let (si, ci) = self.inclination.sin_cos();
        let r1 = Matrix3::new(1.0, 0.0, 0.0, 0.0, ci, -si, 0.0, si, ci);
        let rot = r3(-self.raan) * r1;
        (rot * in_plane_p, rot * in_plane_v)
    }

    /// Construct elements so the satellite sits at the given elevation and
    /// azimuth as seen from `user_pos` at the reference epoch, on a circular
    /// orbit of radius `semi_major_axis` moving roughly along its local east.
    pub fn from_sky_position(
        prn: u8,
        user_pos: &Vector3<f64>,
        elevation: f64,
        azimuth: f64,
        semi_major_axis: f64,
        t_ref: f64,
        clock: SatClockModel,
    ) -> Self {
        let (lat, lon, _) = super::ecef_to_geodetic(user_pos);
        let enu_t = super::enu_basis(lat, lon).transpose();
        let (se, ce) = elevation.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        let los = enu_t * Vector3::new(ce * sa, ce * ca, se);
        // Range to the orbital shell along the line of sight.
        let b = user_pos.dot(&los);
        let c = user_pos.norm_squared() - semi_major_axis * semi_major_axis;
        let range = -b + (b * b - c).sqrt();
        let sat_ecef = user_pos + los * range;
        let sat_eci = r3(OMEGA_IE * t_ref).transpose() * sat_ecef;

        let p_hat = sat_eci.normalize();
        let z = Vector3::new(0.0, 0.0, 1.0);
        let mut east = z.cross(&p_hat);
        if east.norm() < 1e-6 {
            east = Vector3::new(1.0, 0.0, 0.0).cross(&p_hat);
        }
        let v_hat = east.normalize();
        let n_hat = p_hat.cross(&v_hat).normalize();

        let inclination = n_hat.z.clamp(-1.0, 1.0).acos();
        let node = z.cross(&n_hat);
        let (raan, arg_latitude) = if node.norm() < 1e-9 {
            (0.0, sat_eci.y.atan2(sat_eci.x))
        } else {
            let k = node.normalize();
            let raan = k.y.atan2(k.x);
            let cosu = k.dot(&p_hat).clamp(-1.0, 1.0);
            let sinu = k.cross(&p_hat).dot(&n_hat);
            (raan, sinu.atan2(cosu))
        };
        Self {
            prn,
            semi_major_axis,
            inclination,
            raan,
            arg_latitude,
            clock,
        }
    }
}

/// Deterministic per-PRN circular-orbit ephemeris.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SyntheticEphemeris {
    /// Reference epoch of the orbital elements and clock polynomials [s].
    pub t_ref: f64,
    pub satellites: Vec<OrbitElements>,
}

impl SyntheticEphemeris {
    pub fn prns(&self) -> impl Iterator<Item = u8> + '_ {
        self.satellites.iter().map(|s| s.prn)
    }

    pub fn elements(&self, prn: u8) -> Option<&OrbitElements> {
        self.satellites.iter().find(|s| s.prn == prn)
    }

    /// Satellite state at GPS time `t`.
    pub fn sat_state_at(&self, prn: u8, t: f64) -> Result<SatelliteState, GeometryError> {
        let el = self.elements(prn).ok_or(GeometryError::UnknownPrn(prn))?;
        let (p_eci, v_eci) = el.eci_state(t, self.t_ref);
        let rot = r3(OMEGA_IE * t);
        let pos_ecef = rot * p_eci;
        let vel_ecef = rot * v_eci - Vector3::new(0.0, 0.0, OMEGA_IE).cross(&pos_ecef);
        Ok(SatelliteState {
            prn,
            pos_ecef,
            vel_ecef,
            clock_bias: el.clock.a0 + el.clock.a1 * (t - self.t_ref),
            clock_drift: el.clock.a1,
        })
    }
}
