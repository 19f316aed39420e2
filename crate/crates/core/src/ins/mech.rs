//! Strapdown mechanization in the ECEF frame.

use nalgebra::{Matrix3, Vector3};

use super::earth::{earth_rotation_matrix, gravity_ecef, omega_ie_vec};
use super::{CompensatedImuIncrement, InsError};
use crate::constants::EPOCHS_PER_INS;

/// Full inertial navigation state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsState {
    pub v_ecef: Vector3<f64>,
    pub p_ecef: Vector3<f64>,
    /// Body-to-ECEF direction cosine matrix.
    pub c_b2e: Matrix3<f64>,
    /// Time of validity [s].
    pub t: f64,
    /// INS epoch index k'.
    pub epoch: u64,
}

impl InsState {
    /// Frobenius deviation of `C^T C` from identity.
    pub fn orthonormality_defect(&self) -> f64 {
        (self.c_b2e.transpose() * self.c_b2e - Matrix3::identity()).norm()
    }
}

/// Symmetric first-order re-orthonormalization `C (I - 1/2 (C^T C - I))`.
fn reorthonormalize(c: &Matrix3<f64>) -> Matrix3<f64> {
    let err = c.transpose() * c - Matrix3::identity();
    c * (Matrix3::identity() - err * 0.5)
}

/// One mechanization step with explicit gravity/Earth-rate overrides.
///
/// `mechanize_step` is the production entry point; the overrides exist so
/// degenerate configurations (free fall, non-rotating Earth) stay testable.
pub fn mechanize_step_with(
    prev: &InsState,
    inc: &CompensatedImuIncrement,
    gravity_override: Option<Vector3<f64>>,
    omega_override: Option<Vector3<f64>>,
) -> Result<InsState, InsError> {
    if !(prev.v_ecef.iter().all(|x| x.is_finite())
        && prev.p_ecef.iter().all(|x| x.is_finite())
        && prev.c_b2e.iter().all(|x| x.is_finite())
        && inc.delta_theta.iter().all(|x| x.is_finite())
        && inc.delta_v.iter().all(|x| x.is_finite()))
    {
        return Err(InsError::NonFinite);
    }
    let dt = inc.dt;
    let omega = omega_override.unwrap_or_else(omega_ie_vec);
    let gravity = match gravity_override {
        Some(g) => g,
        None => gravity_ecef(&prev.p_ecef)?,
    };

    // Averaging transformation over the interval: half the Earth rotation and
    // half the body rotation applied to the prior attitude.
    let half_body = Matrix3::identity() + (inc.delta_theta * 0.5).cross_matrix();
    let earth_half = if omega_override.is_none() {
        earth_rotation_matrix(dt * 0.5)
    } else {
        Matrix3::identity() + (-(omega * (dt * 0.5))).cross_matrix()
    };
    let c_avg = earth_half * prev.c_b2e * half_body;

    let v_next =
        prev.v_ecef + c_avg * inc.delta_v + (gravity - 2.0 * omega.cross(&prev.v_ecef)) * dt;
    let p_next = prev.p_ecef + (v_next + prev.v_ecef) * (dt * 0.5);

    let earth_full = if omega_override.is_none() {
        earth_rotation_matrix(dt)
    } else {
        Matrix3::identity() + (-(omega * dt)).cross_matrix()
    };
    let c_raw = earth_full * prev.c_b2e * (Matrix3::identity() + inc.delta_theta.cross_matrix());
    let c_next = reorthonormalize(&c_raw);

    Ok(InsState {
        v_ecef: v_next,
        p_ecef: p_next,
        c_b2e: c_next,
        t: prev.t + dt,
        epoch: prev.epoch + 1,
    })
}

/// One 0.02 s mechanization step: averaged-DCM velocity update with Coriolis
/// and gravity, trapezoidal position update, first-order attitude update with
/// re-orthonormalization.
pub fn mechanize_step(
    prev: &InsState,
    inc: &CompensatedImuIncrement,
) -> Result<InsState, InsError> {
    mechanize_step_with(prev, inc, None, None)
}

/// Zero-order hold of the latest INS state across the tracking epochs that
/// fall between INS updates. Fails when an update is actually due.
pub fn dr_interpolate(latest: &InsState, k: u64) -> Result<InsState, InsError> {
    if k % EPOCHS_PER_INS == 0 {
        return Err(InsError::HoldAtUpdateEpoch(k));
    }
    Ok(*latest)
}
