//! Weighted nonlinear least-squares single-point position and velocity.

use nalgebra::{DMatrix, DVector, Matrix4, Vector3, Vector4};

use super::PositioningError;
use crate::constants::{L1_CARRIER_HZ, SPEED_OF_LIGHT};
use crate::constellation::enu_basis;

/// Per-satellite inputs to the measurement-domain solvers: transmit-time
/// satellite state in the receive-time frame plus modeled path delays.
#[derive(Debug, Clone, Copy)]
pub struct SatGeometry {
    pub prn: u8,
    pub sat_pos: Vector3<f64>,
    pub sat_vel: Vector3<f64>,
    /// Satellite clock bias [s].
    pub sat_clock_bias: f64,
    /// Satellite clock drift [s/s].
    pub sat_clock_drift: f64,
    /// Modeled ionosphere + troposphere along the path [m].
    pub atmos_delay_m: f64,
    pub elevation: f64,
}

#[derive(Debug, Clone)]
pub struct SppSolution {
    pub p_ecef: Vector3<f64>,
    /// Receiver clock bias [m].
    pub clock_bias_m: f64,
    /// Post-fit residuals per PRN [m].
    pub residuals: Vec<(u8, f64)>,
    pub gdop: f64,
    pub pdop: f64,
    pub hdop: f64,
    pub vdop: f64,
    pub iterations: u32,
}

/// Gauss-Newton weighted NLS on pseudoranges. Weights are sin^2(elevation).
pub fn spp_wnls(
    obs: &[(u8, f64)],
    sats: &[SatGeometry],
    init: &Vector3<f64>,
) -> Result<SppSolution, PositioningError> {
    let matched: Vec<(f64, SatGeometry)> = obs
        .iter()
        .filter_map(|&(prn, pr)| {
            sats.iter().find(|s| s.prn == prn).map(|s| (pr, *s))
        })
        .collect();
    let n = matched.len();
    if n < 4 {
        return Err(PositioningError::TooFewSatellites { need: 4, got: n });
    }

    let mut p = *init;
    let mut b = 0.0f64;
    let mut iterations = 0;
    let mut h_unweighted = DMatrix::zeros(n, 4);
    loop {
        let mut ata = Matrix4::zeros();
        let mut atb = Vector4::zeros();
        for (row, (pr, s)) in matched.iter().enumerate() {
            let d = s.sat_pos - p;
            let r = d.norm();
            let e = d / r;
            let w = s.elevation.sin().powi(2).max(1e-3);
            let predicted = r + b - SPEED_OF_LIGHT * s.sat_clock_bias + s.atmos_delay_m;
            let resid = pr - predicted;
            let h = Vector4::new(-e.x, -e.y, -e.z, 1.0);
            ata += h * h.transpose() * w;
            atb += h * resid * w;
            for c in 0..4 {
                h_unweighted[(row, c)] = h[c];
            }
        }
        let delta = ata
            .lu()
            .solve(&atb)
            .ok_or(PositioningError::SingularGeometry)?;
        p += Vector3::new(delta.x, delta.y, delta.z);
        b += delta.w;
        iterations += 1;
        if delta.xyz().norm() < 1e-4 {
            break;
        }
        if iterations >= 10 {
            return Err(PositioningError::NoConvergence(10));
        }
    }

    // DOPs from the unweighted geometry at the solution.
    let q = (h_unweighted.transpose() * &h_unweighted)
        .try_inverse()
        .ok_or(PositioningError::SingularGeometry)?;
    let gdop = (q[(0, 0)] + q[(1, 1)] + q[(2, 2)] + q[(3, 3)]).sqrt();
    if !gdop.is_finite() {
        return Err(PositioningError::SingularGeometry);
    }
    let pdop = (q[(0, 0)] + q[(1, 1)] + q[(2, 2)]).sqrt();
    let (lat, lon, _) = crate::constellation::ecef_to_geodetic(&p);
    let r_enu = enu_basis(lat, lon);
    let q_pos = nalgebra::Matrix3::from_fn(|i, j| q[(i, j)]);
    let q_enu = r_enu * q_pos * r_enu.transpose();
    let hdop = (q_enu[(0, 0)] + q_enu[(1, 1)]).sqrt();
    let vdop = q_enu[(2, 2)].sqrt();

    let residuals = matched
        .iter()
        .map(|(pr, s)| {
            let d = s.sat_pos - p;
            let predicted = d.norm() + b - SPEED_OF_LIGHT * s.sat_clock_bias + s.atmos_delay_m;
            (s.prn, pr - predicted)
        })
        .collect();

    Ok(SppSolution {
        p_ecef: p,
        clock_bias_m: b,
        residuals,
        gdop,
        pdop,
        hdop,
        vdop,
        iterations,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct VelocitySolution {
    pub v_ecef: Vector3<f64>,
    /// Receiver clock drift in Doppler-equivalent meters per second: the
    /// common-mode Doppler across channels scaled by the carrier wavelength.
    pub clock_drift_mps: f64,
}

/// Linear least squares on carrier Doppler measurements, solved against the
/// same aiding model the vector feedback uses, so the estimated drift plugs
/// straight back into that model.
pub fn vel_nls(
    obs: &[(u8, f64)],
    sats: &[SatGeometry],
    user_pos: &Vector3<f64>,
) -> Result<VelocitySolution, PositioningError> {
    let matched: Vec<(f64, SatGeometry)> = obs
        .iter()
        .filter_map(|&(prn, fd)| sats.iter().find(|s| s.prn == prn).map(|s| (fd, *s)))
        .collect();
    let n = matched.len();
    if n < 4 {
        return Err(PositioningError::TooFewSatellites { need: 4, got: n });
    }
    let lambda = SPEED_OF_LIGHT / L1_CARRIER_HZ;
    let mut ata = Matrix4::zeros();
    let mut atb = Vector4::zeros();
    for (fd, s) in &matched {
        let d = s.sat_pos - user_pos;
        let e = d / d.norm();
        let w = s.elevation.sin().powi(2).max(1e-3);
        // fd = (1/lambda) (v_u . e - v_s . e + D - c*dt_s_dot)
        let rhs = lambda * fd + s.sat_vel.dot(&e) + SPEED_OF_LIGHT * s.sat_clock_drift;
        let h = Vector4::new(e.x, e.y, e.z, 1.0);
        ata += h * h.transpose() * w;
        atb += h * rhs * w;
    }
    let sol = ata
        .lu()
        .solve(&atb)
        .ok_or(PositioningError::SingularGeometry)?;
    // Rank check via the unweighted geometry.
    let mut hmat = DMatrix::zeros(n, 4);
    for (row, (_, s)) in matched.iter().enumerate() {
        let d = s.sat_pos - user_pos;
        let e = d / d.norm();
        hmat[(row, 0)] = e.x;
        hmat[(row, 1)] = e.y;
        hmat[(row, 2)] = e.z;
        hmat[(row, 3)] = 1.0;
    }
    if hmat.rank(1e-8) < 4 {
        return Err(PositioningError::SingularGeometry);
    }
    let _ = DVector::<f64>::zeros(1);
    Ok(VelocitySolution {
        v_ecef: Vector3::new(sol.x, sol.y, sol.z),
        clock_drift_mps: sol.w,
    })
}
