//! Measurement-domain engines: SPP, velocity NLS, float RTK, and the
//! base-station differential corrections feeding the code-phase aiding.

mod base;
mod corrections;
mod rtk;
mod spp;

pub use base::{
    read_base_csv, synthesize_base_epoch, write_base_csv, BaseObservation, BaseStationEpoch,
    BaseSynthConfig,
};
pub use corrections::{base_corrections, CorrectionSet, MultipathEstimator};
pub use rtk::{FloatRtk, RtkConfig, RtkSolution};
pub use spp::{spp_wnls, vel_nls, SatGeometry, SppSolution, VelocitySolution};

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// Where a navigation solution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Provenance {
    Spp,
    Rtk,
    InsDr,
    EkfFused,
    GroundTruth,
}

/// User position/velocity/attitude with provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavSolution {
    pub p_ecef: Vector3<f64>,
    pub v_ecef: Vector3<f64>,
    pub c_b2e: Option<Matrix3<f64>>,
    pub provenance: Provenance,
    pub t: f64,
}

#[derive(Debug, Error)]
pub enum PositioningError {
    #[error("need at least {need} satellites, got {got}")]
    TooFewSatellites { need: usize, got: usize },
    #[error("iteration did not converge after {0} steps")]
    NoConvergence(usize),
    #[error("degenerate geometry (singular normal matrix)")]
    SingularGeometry,
    #[error("master satellite PRN {0} missing from {1}")]
    MasterMissing(u8, &'static str),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("base csv malformed: {0}")]
    BadCsv(String),
}
