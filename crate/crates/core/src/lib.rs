//! GPS L1 C/A vector-tracking SDR laboratory.
//!
//! This crate builds a complete closed-loop testbed for absolute-position-aided
//! (APA) code-phase tracking: a deterministic IF-signal and IMU simulator with
//! known ground truth, per-satellite tracking channels, a strapdown INS in the
//! ECEF frame, a 15-state error-state EKF fusing float-RTK positions with INS
//! dead reckoning, and a multi-rate scheduler that steers every channel's code
//! and carrier NCOs from the fused navigation solution.
//!
//! Five receiver architectures share the same baseband substrate and differ
//! only in their feedback wiring:
//!
//! - `stl` — independent scalar DLL/PLL per channel
//! - `rtk-vdfll` — velocity (Doppler-domain) vector aiding from GNSS solutions
//! - `rtkins-vdfll` — Doppler aiding from the RTK/INS fused navigator
//! - `rtk-vdfpll` — Doppler aiding plus direct code-phase steering from the
//!   float RTK position
//! - `rtkins-vdfpll` — code-phase steering from the RTK/INS EKF and the INS
//!   dead-reckoning interpolants
//!
//! plus a hardware-in-the-loop style `gt-vdfpll` mode fed with the true
//! position, which upper-bounds what the architecture can achieve on a given
//! scenario.


pub mod baseband;
pub mod constants;
pub mod constellation;


pub mod ins;
pub mod positioning;

pub mod signal;


#[doc(hidden)]
pub mod oracle;
