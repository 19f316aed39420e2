//! Narrowband/wideband power-ratio C/N0 estimator.

/// Accumulates prompt samples over a fixed number of epochs and produces a
/// smoothed C/N0 estimate in dB-Hz.
#[derive(Debug, Clone, Copy)]
pub struct Cn0Estimator {
    window: u32,
    t_coh: f64,
    count: u32,
    sum_i: f64,
    sum_q: f64,
    sum_power: f64,
    estimate_dbhz: f64,
}

impl Cn0Estimator {
    pub fn new(window: u32, t_coh: f64, initial_dbhz: f64) -> Self {
        Self {
            window,
            t_coh,
            count: 0,
            sum_i: 0.0,
            sum_q: 0.0,
            sum_power: 0.0,
            estimate_dbhz: initial_dbhz,
        }
    }

    pub fn update(&mut self, i_p: f64, q_p: f64) -> f64 {
        // Wipe sign flips from data bits on the narrowband sum.
        let s = if i_p < 0.0 { -1.0 } else { 1.0 };
        self.sum_i += s * i_p;
        self.sum_q += s * q_p;
        self.sum_power += i_p * i_p + q_p * q_p;
        self.count += 1;
        if self.count == self.window {
            let m = self.window as f64;
            let nbp = self.sum_i * self.sum_i + self.sum_q * self.sum_q;
            let wbp = self.sum_power * m;
            let mu = nbp / wbp.max(1e-30);
            let denom = (1.0 - mu).max(1e-6);
            let snr_per_epoch = ((mu - 1.0 / m) / denom).max(1e-6);
            let cn0 = 10.0 * (snr_per_epoch / self.t_coh).log10();
            // Light smoothing keeps single-window flukes out of the logs.
            self.estimate_dbhz = if self.estimate_dbhz > 0.0 {
                0.7 * self.estimate_dbhz + 0.3 * cn0
            } else {
                cn0
            };
            self.count = 0;
            self.sum_i = 0.0;
            self.sum_q = 0.0;
            self.sum_power = 0.0;
        }
        self.estimate_dbhz
    }

    pub fn value_dbhz(&self) -> f64 {
        self.estimate_dbhz
    }
}
