//! Two-sample coning and sculling compensation.

use nalgebra::Vector3;

use super::InsError;
use crate::signal::ImuSample;

/// Compensated angle/velocity increments over one 0.02 s INS interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensatedImuIncrement {
    /// Coning-corrected rotation vector [rad].
    pub delta_theta: Vector3<f64>,
    /// Sculling-corrected velocity increment in the body frame at the
    /// interval start [m/s].
    pub delta_v: Vector3<f64>,
    /// Interval length [s]; exactly two raw IMU periods.
    pub dt: f64,
    /// Time at the end of the interval [s].
    pub t_end: f64,
}

/// Combine two consecutive 100 Hz IMU samples into one compensated increment.
///
/// `delta_theta = t1 + t2 + (2/3) t1 x t2` and
/// `delta_v = v1 + v2 + 1/2 (t1 + t2) x (v1 + v2) + (2/3)(t1 x v2 + v1 x t2)`,
/// the classic two-sample forms; `ti`, `vi` are the per-sample increments.
pub fn coning_sculling(
    s1: &ImuSample,
    s2: &ImuSample,
) -> Result<CompensatedImuIncrement, InsError> {
    let h = s2.t - s1.t;
    if (h - 0.01).abs() > 1e-6 {
        return Err(InsError::BadSampleSpacing(h));
    }
    let t1 = s1.angular_rate * h;
    let t2 = s2.angular_rate * h;
    let v1 = s1.specific_force * h;
    let v2 = s2.specific_force * h;

    let delta_theta = t1 + t2 + t1.cross(&t2) * (2.0 / 3.0);
    let rot = (t1 + t2).cross(&(v1 + v2)) * 0.5;
    let scul = (t1.cross(&v2) + v1.cross(&t2)) * (2.0 / 3.0);
    let delta_v = v1 + v2 + rot + scul;

    Ok(CompensatedImuIncrement {
        delta_theta,
        delta_v,
        dt: 2.0 * h,
        t_end: s2.t + h,
    })
}
