//! Per-satellite tracking-channel substrate.
//!
//! Correlation, discriminators, loop filters, NCO bookkeeping, carrier
//! smoothing, and C/N0 estimation. All five receiver architectures configure
//! these same pieces; none of the mode-specific feedback logic lives here.

mod channel;
mod cn0;
mod discriminator;
mod loop_filter;
mod smoothing;

pub use channel::{
    integrate_and_dump, nco_advance, Channel, ChannelConfig, ChannelState, CorrelatorOutput,
    GnssMeasurement,
};
pub use cn0::Cn0Estimator;
pub use discriminator::{carrier_discriminator, code_discriminator};
pub use loop_filter::{loop_filter_step, LoopFilterConfig, LoopFilterState};
pub use smoothing::{carrier_smooth, CarrierSmoother};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BasebandError {
    #[error("block length {got} does not match the coherent interval ({want})")]
    BlockLength { got: usize, want: usize },
    #[error("degenerate correlator output (|E|+|L| = 0)")]
    NoCodePower,
    #[error("degenerate prompt (iP = qP = 0)")]
    NoPromptPower,
    #[error("loop filter config unstable: Bn*T = {0}")]
    UnstableLoop(f64),
}
