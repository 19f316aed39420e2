//! Deterministic GPS L1 C/A IF-signal and IMU simulator.
//!
//! The simulator is the ground-truth oracle for every experiment: given a
//! scenario (static user, receiver clock model, per-PRN signal levels,
//! multipath rays, IMU error budget) and a seed, it produces bit-identical
//! digitized IF sample blocks and IMU streams on every run. Noise is
//! counter-based per block, so blocks can be generated in any order.

mod cacode;
mod ifdump;
mod imu;
mod synth;
mod truth;

pub use cacode::{generate_ca_code, CaCode, CodeError};
pub use ifdump::{read_if_dump_meta, write_if_dump, IfDumpMeta};
pub use imu::{generate_imu_stream, ImuErrorModel, ImuSample, ImuSimulator};
pub use synth::{IfPlan, IfSampleBlock, IfSimulator, RayParams, SignalParams};
pub use truth::{range_and_rate_at, ClockSeries, MultipathRay, RangeInfo, ScenarioTruth};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Geometry(#[from] crate::constellation::GeometryError),
    #[error("no visible satellites at t = {0} s")]
    NoVisibleSatellites(f64),
    #[error("IF plan invalid: {0}")]
    BadPlan(String),
    #[error("multipath ray invalid: {0}")]
    BadRay(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("dump metadata malformed: {0}")]
    BadDump(String),
}
