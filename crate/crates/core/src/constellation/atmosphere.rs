//! Klobuchar ionospheric and Saastamoinen tropospheric delay models.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{ecef_to_geodetic, elevation_azimuth, GeometryError};
use crate::constants::SPEED_OF_LIGHT;

/// Broadcast-style ionosphere coefficients plus the tropospheric surface
/// assumptions. One instance serves both the simulator and the receiver-side
/// predictions, so modeled delays cancel exactly under perfect aiding.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AtmosphereModel {
    /// Klobuchar amplitude coefficients [s, s/sc, s/sc^2, s/sc^3].
    pub alpha: [f64; 4],
    /// Klobuchar period coefficients [s, s/sc, s/sc^2, s/sc^3].
    pub beta: [f64; 4],
    /// Relative humidity used by the Saastamoinen wet term, 0..1.
    #[serde(default = "default_humidity")]
    pub rel_humidity: f64,
}

fn default_humidity() -> f64 {
    0.5
}

impl Default for AtmosphereModel {
    fn default() -> Self {
        // A typical broadcast coefficient set.
        Self {
            alpha: [0.4657e-8, 0.1490e-7, -0.5960e-7, -0.1192e-6],
            beta: [0.8192e5, 0.9830e5, -0.6554e5, -0.5243e6],
            rel_humidity: 0.5,
        }
    }
}

impl AtmosphereModel {
    /// L1 ionospheric delay [m] for a user at geodetic (lat, lon) [rad],
    /// looking at (elevation, azimuth) [rad], at GPS time-of-week `t` [s].
    pub fn klobuchar_l1(&self, lat: f64, lon: f64, el: f64, az: f64, t: f64) -> f64 {
        let pi = std::f64::consts::PI;
        // The broadcast model works in semicircles.
        let e_sc = el / pi;
        let phi_u = lat / pi;
        let lam_u = lon / pi;

        let psi = 0.0137 / (e_sc + 0.11) - 0.022;
        let phi_i = (phi_u + psi * az.cos()).clamp(-0.416, 0.416);
        let lam_i = lam_u + psi * az.sin() / (phi_i * pi).cos();
        let phi_m = phi_i + 0.064 * ((lam_i - 1.617) * pi).cos();

        let mut t_loc = 4.32e4 * lam_i + t;
        t_loc = t_loc.rem_euclid(86400.0);

        let f = 1.0 + 16.0 * (0.53 - e_sc).powi(3);
        let mut per = self.beta[0]
            + self.beta[1] * phi_m
            + self.beta[2] * phi_m * phi_m
            + self.beta[3] * phi_m * phi_m * phi_m;
        if per < 72000.0 {
            per = 72000.0;
        }
        let mut amp = self.alpha[0]
            + self.alpha[1] * phi_m
            + self.alpha[2] * phi_m * phi_m
            + self.alpha[3] * phi_m * phi_m * phi_m;
        if amp < 0.0 {
            amp = 0.0;
        }
        let x = 2.0 * pi * (t_loc - 50400.0) / per;
        let delay_s = if x.abs() < 1.57 {
            f * (5e-9 + amp * (1.0 - x * x / 2.0 + x.powi(4) / 24.0))
        } else {
            f * 5e-9
        };
        SPEED_OF_LIGHT * delay_s
    }

    /// Saastamoinen tropospheric delay [m] with a standard atmosphere and a
    /// plain 1/sin(el) mapping.
    pub fn saastamoinen(&self, lat: f64, height: f64, el: f64) -> f64 {
        let h = height.clamp(0.0, 11_000.0);
        let pres = 1013.25 * (1.0 - 2.2557e-5 * h).powf(5.2568);
        let temp = 288.15 - 6.5e-3 * h;
        let e = 6.108 * self.rel_humidity * ((17.15 * temp - 4684.0) / (temp - 38.45)).exp();
        let zhd = 0.0022768 * pres / (1.0 - 0.00266 * (2.0 * lat).cos() - 0.00028 * h / 1e3);
        let zwd = 0.002277 * (1255.0 / temp + 0.05) * e;
        (zhd + zwd) / el.sin()
    }

    /// Ionospheric and tropospheric delays [m] along the path to a satellite.
    pub fn atmospheric_delays(
        &self,
        user_pos: &Vector3<f64>,
        sat_pos: &Vector3<f64>,
        t: f64,
    ) -> Result<(f64, f64), GeometryError> {
        let (el, az) = elevation_azimuth(user_pos, sat_pos)?;
        if el <= 0.0 {
            return Err(GeometryError::BelowHorizon(el));
        }
        let (lat, lon, h) = ecef_to_geodetic(user_pos);
        let iono = self.klobuchar_l1(lat, lon, el, az, t);
        let tropo = self.saastamoinen(lat, h, el);
        Ok((iono, tropo))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{enu_basis, geodetic_to_ecef};
    use approx::assert_abs_diff_eq;

    /// Independent re-derivation of the broadcast ionosphere algorithm, kept
    /// deliberately separate from the implementation above.
    fn klobuchar_reference(
        alpha: [f64; 4],
        beta: [f64; 4],
        lat_rad: f64,
        lon_rad: f64,
        el_rad: f64,
        az_rad: f64,
        gps_t: f64,
    ) -> f64 {
        let pi = std::f64::consts::PI;
        let el = el_rad / pi;
        let psi = 0.0137 / (el + 0.11) - 0.022;
        let mut phi = lat_rad / pi + psi * az_rad.cos();
        phi = phi.max(-0.416).min(0.416);
        let lam = lon_rad / pi + psi * az_rad.sin() / (phi * pi).cos();
        let phi_m = phi + 0.064 * ((lam - 1.617) * pi).cos();
        let mut t = 43200.0 * lam + gps_t;
        t -= (t / 86400.0).floor() * 86400.0;
        let f = 1.0 + 16.0 * (0.53 - el).powi(3);
        let per = (beta[0] + beta[1] * phi_m + beta[2] * phi_m.powi(2) + beta[3] * phi_m.powi(3))
            .max(72000.0);
        let amp = (alpha[0] + alpha[1] * phi_m + alpha[2] * phi_m.powi(2) + alpha[3] * phi_m.powi(3))
            .max(0.0);
        let x = 2.0 * pi * (t - 50400.0) / per;
        let d = if x.abs() < 1.57 {
            f * (5e-9 + amp * (1.0 - x * x / 2.0 + x.powi(4) / 24.0))
        } else {
            f * 5e-9
        };
        299_792_458.0 * d
    }

    #[test]
    fn zero_coefficients_hit_the_night_floor() {
        let m = AtmosphereModel {
            alpha: [0.0; 4],
            beta: [0.0; 4],
            rel_humidity: 0.5,
        };
        let el = 0.7f64;
        let got = m.klobuchar_l1(0.4, -1.2, el, 1.0, 120_000.0);
        let f = 1.0 + 16.0 * (0.53 - el / std::f64::consts::PI).powi(3);
        assert_abs_diff_eq!(got, SPEED_OF_LIGHT * 5e-9 * f, epsilon = 1e-9);
    }

    #[test]
    fn matches_independent_reference_on_grid() {
        let m = AtmosphereModel::default();
        for &el in &[0.1f64, 0.4, 0.9, 1.4] {
            for &az in &[0.0f64, 1.5, 3.0, 5.0] {
                for &t in &[10_000.0, 50_400.0, 80_000.0] {
                    let a = m.klobuchar_l1(0.9, -2.0, el, az, t);
                    let b = klobuchar_reference(m.alpha, m.beta, 0.9, -2.0, el, az, t);
                    assert_abs_diff_eq!(a, b, epsilon = 1e-10);
                    assert!(a >= 0.0);
                }
            }
        }
    }

    #[test]
    fn saastamoinen_zenith_at_sea_level() {
        let m = AtmosphereModel::default();
        let z = m.saastamoinen(0.8, 0.0, std::f64::consts::FRAC_PI_2);
        assert!((2.2..=2.5).contains(&z), "zenith tropo {z}");
    }

    #[test]
    fn tropo_grows_toward_horizon() {
        let m = AtmosphereModel::default();
        let lo = m.saastamoinen(0.8, 50.0, 5.0_f64.to_radians());
        let hi = m.saastamoinen(0.8, 50.0, 90.0_f64.to_radians());
        assert!(lo > hi);
    }

    #[test]
    fn delays_nonnegative_and_nonincreasing_in_elevation() {
        let m = AtmosphereModel::default();
        let user = geodetic_to_ecef(0.89, -1.99, 100.0);
        // Pick a time near the local diurnal maximum so the pierce-point
        // drift does not fight the obliquity factor.
        let (_, lon, _) = (0.89, -1.99, 100.0);
        let t = 50_400.0 - 43_200.0 * lon / std::f64::consts::PI;
        let up_basis = enu_basis(0.89, -1.99).transpose();
        let mut prev_iono = f64::INFINITY;
        let mut prev_tropo = f64::INFINITY;
        for deg in (5..=90).step_by(5) {
            let el = (deg as f64).to_radians();
            let dir = up_basis
                * nalgebra::Vector3::new(0.0, el.cos(), el.sin());
            let sat = user + dir * 2.2e7;
            let (iono, tropo) = m.atmospheric_delays(&user, &sat, t).unwrap();
            assert!(iono >= 0.0 && tropo >= 0.0);
            assert!(iono <= prev_iono + 1e-9, "iono not monotone at {deg} deg");
            assert!(tropo <= prev_tropo + 1e-12);
            prev_iono = iono;
            prev_tropo = tropo;
        }
    }

    #[test]
    fn below_horizon_is_error() {
        let m = AtmosphereModel::default();
        let user = geodetic_to_ecef(0.5, 0.5, 0.0);
        let down = -user.normalize();
        let sat = user + down * 2.0e7;
        assert!(m.atmospheric_delays(&user, &sat, 0.0).is_err());
    }
}
