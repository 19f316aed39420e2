//! Digital loop filters of order 1..3 with standard bandwidth-to-gain
//! mappings (damping 0.707 for 2nd order, the 2.4/1.1 coefficient pair for
//! 3rd order).

use serde::{Deserialize, Serialize};

use super::BasebandError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopFilterConfig {
    pub order: u8,
    /// Noise bandwidth [Hz].
    pub noise_bandwidth: f64,
    /// Update interval [s].
    pub update_interval: f64,
}

impl LoopFilterConfig {
    pub fn new(order: u8, noise_bandwidth: f64, update_interval: f64) -> Result<Self, BasebandError> {
        let bt = noise_bandwidth * update_interval;
        if !(0.0..0.4).contains(&bt) {
            return Err(BasebandError::UnstableLoop(bt));
        }
        assert!((1..=3).contains(&order), "loop order {order}");
        Ok(Self {
            order,
            noise_bandwidth,
            update_interval,
        })
    }
}

/// Integrator memory; unused stages stay at zero for lower orders.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LoopFilterState {
    pub vel: f64,
    pub acc: f64,
}

impl LoopFilterState {
    /// Seed the rate integrator, e.g. with an acquisition Doppler estimate.
    pub fn seeded(rate: f64) -> Self {
        Self { vel: rate, acc: 0.0 }
    }
}

/// One filter update. Input is the discriminated error; output is the rate
/// command in error-units per second.
pub fn loop_filter_step(
    cfg: &LoopFilterConfig,
    mem: LoopFilterState,
    input: f64,
) -> (LoopFilterState, f64) {
    let dt = cfg.update_interval;
    let mut m = mem;
    let out = match cfg.order {
        1 => 4.0 * cfg.noise_bandwidth * input,
        2 => {
            let w0 = cfg.noise_bandwidth / 0.53;
            m.vel += w0 * w0 * input * dt;
            m.vel + std::f64::consts::SQRT_2 * w0 * input
        }
        _ => {
            let w0 = cfg.noise_bandwidth / 0.7845;
            m.acc += w0 * w0 * w0 * input * dt;
            m.vel += (m.acc + 1.1 * w0 * w0 * input) * dt;
            m.vel + 2.4 * w0 * input
        }
    };
    (m, out)
}
