//! Hatch carrier smoothing.

/// One Hatch filter update over an effective window of `n` epochs:
/// `pr/n + (n-1)/n * (prev + carrier_delta)`.
pub fn carrier_smooth(prev_smoothed: f64, pr_raw: f64, carrier_delta_m: f64, n: u32) -> f64 {
    let n = n.max(1) as f64;
    pr_raw / n + (n - 1.0) / n * (prev_smoothed + carrier_delta_m)
}

/// Stateful smoother with slip handling: the window ramps up to its maximum
/// and resets to the raw pseudorange when a cycle slip is flagged.
#[derive(Debug, Clone, Copy)]
pub struct CarrierSmoother {
    pub window: u32,
    count: u32,
    smoothed: f64,
    last_carrier_m: f64,
}

impl CarrierSmoother {
    pub fn new(window: u32) -> Self {
        Self {
            window,
            count: 0,
            smoothed: 0.0,
            last_carrier_m: 0.0,
        }
    }

    /// Feed one epoch. `carrier_m` is the carrier-derived range observable in
    /// meters (any constant offset cancels in the delta).
    pub fn update(&mut self, pr_raw: f64, carrier_m: f64, slip: bool) -> f64 {
        if slip || self.count == 0 {
            self.count = 1;
            self.smoothed = pr_raw;
        } else {
            self.count = (self.count + 1).min(self.window);
            let delta = carrier_m - self.last_carrier_m;
            self.smoothed = carrier_smooth(self.smoothed, pr_raw, delta, self.count);
        }
        self.last_carrier_m = carrier_m;
        self.smoothed
    }

    pub fn value(&self) -> f64 {
        self.smoothed
    }
}
