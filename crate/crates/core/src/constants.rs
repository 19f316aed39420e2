//! Physical and signal-plan constants shared across the receiver.

/// Speed of light in vacuum [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// GPS L1 carrier frequency [Hz].
pub const L1_CARRIER_HZ: f64 = 1_575_420_000.0;

/// GPS C/A spreading code chip rate [Hz].
pub const CA_CHIP_RATE_HZ: f64 = 1_023_000.0;

/// C/A code length in chips.
pub const CA_CODE_LEN: usize = 1023;

/// L1 carrier wavelength [m].
pub const L1_WAVELENGTH_M: f64 = SPEED_OF_LIGHT / L1_CARRIER_HZ;

/// One C/A chip expressed in meters.
pub const CHIP_LEN_M: f64 = SPEED_OF_LIGHT / CA_CHIP_RATE_HZ;

/// Earth rotation rate [rad/s].
pub const OMEGA_IE: f64 = 7.292115e-5;

/// WGS84 semi-major axis [m].
pub const WGS84_A: f64 = 6_378_137.0;

/// WGS84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;

/// WGS84 first eccentricity squared.
pub const WGS84_E2: f64 = WGS84_F * (2.0 - WGS84_F);

/// WGS84 geocentric gravitational constant [m^3/s^2].
pub const WGS84_MU: f64 = 3.986_004_418e14;

/// Normal gravity at the equator (Somigliana) [m/s^2].
pub const GRAVITY_EQUATOR: f64 = 9.780_325_3359;

/// Normal gravity at the poles (Somigliana) [m/s^2].
pub const GRAVITY_POLE: f64 = 9.832_184_9379;

/// Coherent integration interval of one tracking epoch [s].
pub const T_COH: f64 = 0.005;

/// Tracking-loop update rate [Hz].
pub const TRACKING_RATE_HZ: f64 = 200.0;

/// INS dead-reckoning update rate [Hz].
pub const INS_RATE_HZ: f64 = 50.0;

/// Raw IMU sample rate [Hz].
pub const IMU_RATE_HZ: f64 = 100.0;

/// Tracking epochs per INS update (200 Hz / 50 Hz).
pub const EPOCHS_PER_INS: u64 = 4;

/// INS updates per EKF/base-station epoch (50 Hz / 1 Hz).
pub const INS_PER_EKF: u64 = 50;

/// Tracking epochs per EKF/base-station epoch.
pub const EPOCHS_PER_EKF: u64 = EPOCHS_PER_INS * INS_PER_EKF;

/// Tracking epochs per vector-tracking update (200 Hz / 5 Hz).
pub const EPOCHS_PER_VECTOR: u64 = 40;
