//! Synthetic IMU stream for a static user.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constants::IMU_RATE_HZ;
use crate::ins::gravity_ecef;

/// One inertial measurement at 100 Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub t: f64,
    /// Body angular rate w.r.t. inertial space [rad/s].
    pub angular_rate: Vector3<f64>,
    /// Specific force in the body frame [m/s^2].
    pub specific_force: Vector3<f64>,
}

/// IMU error budget.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ImuErrorModel {
    /// Constant gyro bias [rad/s].
    #[serde(default)]
    pub gyro_bias: [f64; 3],
    /// Constant accelerometer bias [m/s^2].
    #[serde(default)]
    pub accel_bias: [f64; 3],
    /// Gyro white noise density [(rad/s)/sqrt(Hz)].
    #[serde(default = "default_gyro_noise")]
    pub gyro_noise_density: f64,
    /// Accelerometer white noise density [(m/s^2)/sqrt(Hz)].
    #[serde(default = "default_accel_noise")]
    pub accel_noise_density: f64,
}

fn default_gyro_noise() -> f64 {
    2e-5
}
fn default_accel_noise() -> f64 {
    5e-4
}

impl Default for ImuErrorModel {
    fn default() -> Self {
        Self {
            gyro_bias: [0.0; 3],
            accel_bias: [0.0; 3],
            gyro_noise_density: default_gyro_noise(),
            accel_noise_density: default_accel_noise(),
        }
    }
}

impl ImuErrorModel {
    /// 10 deg/h gyro and 1 mg accel biases split across axes, the default
    /// low-cost unit of the experiments.
    pub fn low_cost_defaults() -> Self {
        let gyro = 10.0 * std::f64::consts::PI / 180.0 / 3600.0;
        let accel = 9.80665e-3;
        Self {
            gyro_bias: [gyro * 0.6, gyro * 0.64, gyro * 0.48],
            accel_bias: [accel * 0.6, accel * 0.64, accel * 0.48],
            gyro_noise_density: default_gyro_noise(),
            accel_noise_density: default_accel_noise(),
        }
    }
}

/// Deterministic IMU generator for a static user.
pub struct ImuSimulator {
    /// True body-to-ECEF attitude.
    pub c_b2e: Matrix3<f64>,
    true_rate: Vector3<f64>,
    true_force: Vector3<f64>,
    errors: ImuErrorModel,
    seed: u64,
}

impl ImuSimulator {
    pub fn new(
        user_pos: &Vector3<f64>,
        c_b2e: Matrix3<f64>,
        errors: ImuErrorModel,
        seed: u64,
    ) -> Self {
        let omega = Vector3::new(0.0, 0.0, crate::constants::OMEGA_IE);
        let g = gravity_ecef(user_pos).expect("IMU truth gravity");
        Self {
            c_b2e,
            true_rate: c_b2e.transpose() * omega,
            true_force: -(c_b2e.transpose() * g),
            errors,
            seed,
        }
    }

    /// The j-th 100 Hz sample; counter-based noise keeps streams reproducible
    /// regardless of access pattern.
    pub fn sample(&self, j: u64) -> ImuSample {
        let mut rng = ChaCha8Rng::seed_from_u64(
            self.seed ^ 0x1111_2222_3333_4444 ^ j.wrapping_mul(0x2545_F491_4F6C_DD1D),
        );
        let sg = self.errors.gyro_noise_density * IMU_RATE_HZ.sqrt();
        let sa = self.errors.accel_noise_density * IMU_RATE_HZ.sqrt();
        let gn = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        ) * sg;
        let an = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        ) * sa;
        ImuSample {
            t: j as f64 / IMU_RATE_HZ,
            angular_rate: self.true_rate + Vector3::from_column_slice(&self.errors.gyro_bias) + gn,
            specific_force: self.true_force
                + Vector3::from_column_slice(&self.errors.accel_bias)
                + an,
        }
    }
}

/// Materialize a stream over `[0, t_span)`, exactly 100 Hz, timestamps
/// strictly increasing.
pub fn generate_imu_stream(
    user_pos: &Vector3<f64>,
    c_b2e: Matrix3<f64>,
    errors: ImuErrorModel,
    t_span: f64,
    seed: u64,
) -> Vec<ImuSample> {
    let sim = ImuSimulator::new(user_pos, c_b2e, errors, seed);
    let n = (t_span * IMU_RATE_HZ).round() as u64;
    (0..n).map(|j| sim.sample(j)).collect()
}
