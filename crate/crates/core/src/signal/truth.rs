//! Scenario ground truth: user state, receiver clock, multipath geometry,
//! and the exact range/TOA computations shared by simulator and analysis.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constants::{CHIP_LEN_M, OMEGA_IE, SPEED_OF_LIGHT, T_COH};
use crate::constellation::{AtmosphereModel, GeometryError, SyntheticEphemeris};

/// One specular multipath ray.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MultipathRay {
    pub prn: u8,
    /// Extra path delay [m]; must stay below one C/A chip.
    pub extra_delay_m: f64,
    /// Amplitude relative to the line-of-sight ray, in (0, 1).
    pub relative_amplitude: f64,
    /// Carrier phase of the ray relative to the line of sight [rad];
    /// 0 = in phase (constructive).
    #[serde(default)]
    pub phase_offset_rad: f64,
    /// Slow rotation of the relative carrier phase [rad/s].
    #[serde(default)]
    pub phase_rate_rad_s: f64,
    #[serde(default)]
    pub onset_s: f64,
    #[serde(default = "default_ray_duration")]
    pub duration_s: f64,
}

fn default_ray_duration() -> f64 {
    f64::INFINITY
}

impl MultipathRay {
    pub fn validate(&self) -> Result<(), super::SignalError> {
        if !(self.extra_delay_m > 0.0 && self.extra_delay_m < CHIP_LEN_M) {
            return Err(super::SignalError::BadRay(format!(
                "extra_delay_m {} outside (0, {:.0})",
                self.extra_delay_m, CHIP_LEN_M
            )));
        }
        if !(self.relative_amplitude > 0.0 && self.relative_amplitude < 1.0) {
            return Err(super::SignalError::BadRay(format!(
                "relative_amplitude {} outside (0, 1)",
                self.relative_amplitude
            )));
        }
        Ok(())
    }

    pub fn active_at(&self, t: f64) -> bool {
        t >= self.onset_s && t - self.onset_s < self.duration_s
    }
}

/// Receiver clock stochastic model (two-state: bias random walk driven by
/// drift, drift random walk).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ClockModel {
    /// Initial bias [s].
    pub bias_s: f64,
    /// Initial drift [s/s].
    pub drift_sps: f64,
    /// White-frequency noise coefficient (Allan h0 equivalent).
    #[serde(default = "default_h0")]
    pub h0: f64,
    /// Random-walk frequency coefficient (Allan h-2 equivalent).
    #[serde(default = "default_hm2")]
    pub h_minus2: f64,
}

fn default_h0() -> f64 {
    1e-21
}
fn default_hm2() -> f64 {
    1e-24
}

impl Default for ClockModel {
    fn default() -> Self {
        Self {
            bias_s: 0.0,
            drift_sps: 0.0,
            h0: default_h0(),
            h_minus2: default_hm2(),
        }
    }
}

/// Static ground truth for one scenario.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioTruth {
    pub user_pos_ecef: [f64; 3],
    #[serde(default)]
    pub rx_clock: ClockModel,
    /// Per-PRN carrier-to-noise density [dB-Hz], as (prn, cn0) pairs.
    pub cn0_dbhz: Vec<(u8, f64)>,
    #[serde(default)]
    pub multipath: Vec<MultipathRay>,
    #[serde(default)]
    pub nav_bit_seed: u64,
}

impl ScenarioTruth {
    pub fn user_pos(&self) -> Vector3<f64> {
        Vector3::from_column_slice(&self.user_pos_ecef)
    }

    pub fn cn0_for(&self, prn: u8) -> Option<f64> {
        self.cn0_dbhz.iter().find(|(p, _)| *p == prn).map(|(_, c)| *c)
    }
}

/// Receiver clock bias/drift sampled on the tracking-epoch grid.
#[derive(Debug, Clone)]
pub struct ClockSeries {
    /// Bias [s] at epoch boundaries t = k * T_coh; length n_epochs + 1.
    pub bias: Vec<f64>,
    /// Drift [s/s] at the same instants.
    pub drift: Vec<f64>,
}

impl ClockSeries {
    /// Evolve the two-state clock over `n_epochs` tracking intervals.
    pub fn generate(model: &ClockModel, n_epochs: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc10c_5e1f_0123_4567);
        let q_bias = model.h0 / 2.0;
        let q_drift = 2.0 * std::f64::consts::PI * std::f64::consts::PI * model.h_minus2;
        let dt = T_COH;
        let mut bias = Vec::with_capacity(n_epochs + 1);
        let mut drift = Vec::with_capacity(n_epochs + 1);
        let mut b = model.bias_s;
        let mut d = model.drift_sps;
        bias.push(b);
        drift.push(d);
        for _ in 0..n_epochs {
            let wb: f64 = rng.sample(StandardNormal);
            let wd: f64 = rng.sample(StandardNormal);
            b += d * dt + wb * (q_bias * dt).sqrt();
            d += wd * (q_drift * dt).sqrt();
            bias.push(b);
            drift.push(d);
        }
        Self { bias, drift }
    }

    pub fn bias_at_epoch(&self, k: usize) -> f64 {
        self.bias[k.min(self.bias.len() - 1)]
    }

    pub fn drift_at_epoch(&self, k: usize) -> f64 {
        self.drift[k.min(self.drift.len() - 1)]
    }
}

/// Geometry outputs for one satellite at one receive instant.
#[derive(Debug, Clone, Copy)]
pub struct RangeInfo {
    /// Geometric range with light-time and Earth-rotation handling [m].
    pub range_m: f64,
    /// Range rate [m/s].
    pub range_rate_mps: f64,
    /// Satellite position at transmit time, rotated into the receive-time
    /// ECEF frame.
    pub sat_pos: Vector3<f64>,
    /// Effective satellite velocity in the receive-time frame.
    pub sat_vel: Vector3<f64>,
    /// Satellite clock bias at transmit time [s].
    pub sat_clock_bias: f64,
    /// Satellite clock drift [s/s].
    pub sat_clock_drift: f64,
    /// Ionospheric delay [m].
    pub iono_m: f64,
    /// Tropospheric delay [m].
    pub tropo_m: f64,
    /// Code time of arrival [s]: (range + iono + tropo)/c - sat clock bias.
    pub toa_s: f64,
}

/// Range, range rate, and TOA of `prn` as received at true time `t` by a
/// static user. Two fixed-point light-time steps; transmit-time satellite
/// state rotated by the Earth rotation over the propagation interval.
pub fn range_and_rate_at(
    eph: &SyntheticEphemeris,
    atmos: &AtmosphereModel,
    prn: u8,
    user_pos: &Vector3<f64>,
    t: f64,
) -> Result<RangeInfo, GeometryError> {
    let s0 = eph.sat_state_at(prn, t)?;
    let mut tau = (s0.pos_ecef - user_pos).norm() / SPEED_OF_LIGHT;
    let mut sat_pos = s0.pos_ecef;
    let mut sat_vel = s0.vel_ecef;
    let mut sat = s0;
    for _ in 0..2 {
        sat = eph.sat_state_at(prn, t - tau)?;
        let rot = crate::ins::earth_rotation_matrix(tau);
        sat_pos = rot * sat.pos_ecef;
        sat_vel = rot * sat.vel_ecef;
        tau = (sat_pos - user_pos).norm() / SPEED_OF_LIGHT;
    }
    let range = (sat_pos - user_pos).norm();
    let e = (sat_pos - user_pos) / range;

    // Range rate including the light-time derivative.
    let z = Vector3::new(0.0, 0.0, 1.0);
    let mut tau_dot = 0.0;
    let mut rate = 0.0;
    for _ in 0..3 {
        let p_dot = -OMEGA_IE * tau_dot * z.cross(&sat_pos) + sat_vel * (1.0 - tau_dot);
        rate = e.dot(&p_dot);
        tau_dot = rate / SPEED_OF_LIGHT;
    }

    let (iono, tropo) = atmos.atmospheric_delays(user_pos, &sat_pos, t)?;
    let toa = (range + iono + tropo) / SPEED_OF_LIGHT - sat.clock_bias;
    Ok(RangeInfo {
        range_m: range,
        range_rate_mps: rate,
        sat_pos,
        sat_vel,
        sat_clock_bias: sat.clock_bias,
        sat_clock_drift: sat.clock_drift,
        iono_m: iono,
        tropo_m: tropo,
        toa_s: toa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{geodetic_to_ecef, OrbitElements, SatClockModel};
    use approx::assert_abs_diff_eq;

    fn test_setup() -> (SyntheticEphemeris, AtmosphereModel, Vector3<f64>) {
        let user = geodetic_to_ecef(0.89, -1.99, 100.0);
        let eph = SyntheticEphemeris {
            t_ref: 0.0,
            satellites: vec![OrbitElements::from_sky_position(
                9,
                &user,
                0.7,
                2.0,
                2.656e7,
                0.0,
                SatClockModel { a0: 1e-5, a1: 2e-12 },
            )],
        };
        (eph, AtmosphereModel::default(), user)
    }

    #[test]
    fn zenith_range_equals_altitude_difference() {
        let user = geodetic_to_ecef(0.3, 0.4, 0.0);
        let eph = SyntheticEphemeris {
            t_ref: 0.0,
            satellites: vec![OrbitElements::from_sky_position(
                1,
                &user,
                std::f64::consts::FRAC_PI_2,
                0.0,
                2.656e7,
                0.0,
                SatClockModel::default(),
            )],
        };
        let atmos = AtmosphereModel {
            alpha: [0.0; 4],
            beta: [0.0; 4],
            rel_humidity: 0.5,
        };
        let info = range_and_rate_at(&eph, &atmos, 1, &user, 0.0).unwrap();
        // Light time shifts the satellite slightly off zenith; the range is
        // still the slant distance to the (rotated) transmit position.
        let d = (info.sat_pos - user).norm();
        assert_abs_diff_eq!(info.range_m, d, epsilon = 1e-9);
        // And toa*c - range = iono + tropo - c*clock by construction.
        let back = info.toa_s * SPEED_OF_LIGHT - info.range_m;
        assert_abs_diff_eq!(
            back,
            info.iono_m + info.tropo_m - SPEED_OF_LIGHT * info.sat_clock_bias,
            epsilon = 1e-9
        );
    }

    #[test]
    fn range_rate_matches_finite_difference() {
        let (eph, atmos, user) = test_setup();
        let h = 0.05;
        for &t in &[10.0f64, 60.0, 300.0] {
            let a = range_and_rate_at(&eph, &atmos, 9, &user, t - h).unwrap();
            let b = range_and_rate_at(&eph, &atmos, 9, &user, t + h).unwrap();
            let mid = range_and_rate_at(&eph, &atmos, 9, &user, t).unwrap();
            let fd = (b.range_m - a.range_m) / (2.0 * h);
            assert!(
                (fd - mid.range_rate_mps).abs() < 1e-3,
                "fd {fd} vs analytic {}",
                mid.range_rate_mps
            );
        }
    }

    #[test]
    fn clock_series_is_deterministic() {
        let m = ClockModel {
            bias_s: 1e-5,
            drift_sps: 1e-9,
            h0: 1e-21,
            h_minus2: 1e-24,
        };
        let a = ClockSeries::generate(&m, 1000, 42);
        let b = ClockSeries::generate(&m, 1000, 42);
        assert_eq!(a.bias, b.bias);
        assert_eq!(a.drift, b.drift);
        // Drift stays near its initial value at these noise levels.
        assert!((a.drift[1000] - 1e-9).abs() < 1e-9);
        // Bias integrates the drift.
        assert_abs_diff_eq!(a.bias[1000], 1e-5 + 1e-9 * 5.0, epsilon = 1e-8);
    }

    #[test]
    fn ray_validation() {
        let mut ray = MultipathRay {
            prn: 5,
            extra_delay_m: 20.0,
            relative_amplitude: 0.5,
            phase_offset_rad: 0.0,
            phase_rate_rad_s: 0.0,
            onset_s: 0.0,
            duration_s: f64::INFINITY,
        };
        assert!(ray.validate().is_ok());
        ray.extra_delay_m = 300.0;
        assert!(ray.validate().is_err());
        ray.extra_delay_m = 20.0;
        ray.relative_amplitude = 1.0;
        assert!(ray.validate().is_err());
    }
}
