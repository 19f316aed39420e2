//! Tracking channel state, correlation, and NCO bookkeeping.

use serde::{Deserialize, Serialize};

use super::{BasebandError, CarrierSmoother, Cn0Estimator, LoopFilterConfig, LoopFilterState};
use crate::constants::{CA_CHIP_RATE_HZ, CA_CODE_LEN, SPEED_OF_LIGHT, T_COH};
use crate::signal::{CaCode, IfSampleBlock};

/// Spec-visible tracking state of one PRN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    pub prn: u8,
    /// Prompt replica code phase at the next block start [chips, 0..1023).
    pub code_phase: f64,
    /// Replica chipping rate during the current block [Hz].
    pub code_freq: f64,
    /// Carrier NCO phase at the next block start [cycles, 0..1).
    pub carrier_phase: f64,
    /// Carrier Doppler command relative to the IF [Hz].
    pub carrier_freq: f64,
    /// IF center frequency of the stream being tracked [Hz].
    pub f_if: f64,
    /// Maintained raw pseudorange [m].
    pub pr_raw: f64,
    /// Accumulated carrier observable [cycles]; grows with range.
    pub carrier_obs: f64,
    pub cn0_est: f64,
    pub lock: bool,
}

/// Early/prompt/late correlation sums over one coherent interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorOutput {
    pub i_e: f64,
    pub q_e: f64,
    pub i_p: f64,
    pub q_p: f64,
    pub i_l: f64,
    pub q_l: f64,
    pub t_epoch: f64,
    /// Total early-late spacing [IF samples].
    pub spacing_samples: f64,
    /// Offset of each tap from the prompt [chips].
    pub half_spacing_chips: f64,
}

impl CorrelatorOutput {
    pub fn prompt_power(&self) -> f64 {
        self.i_p * self.i_p + self.q_p * self.q_p
    }
}

/// Per-channel configuration shared by all architectures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Early/late tap offset from the prompt [IF samples]; the total spacing
    /// is twice this.
    pub el_offset_samples: f64,
    pub dll: LoopFilterConfig,
    pub pll: LoopFilterConfig,
    pub smoothing_window: u32,
    pub cn0_window: u32,
    /// Doppler jump flagged as a cycle slip [Hz].
    pub slip_doppler_jump_hz: f64,
}

impl ChannelConfig {
    pub fn stl_default() -> Self {
        Self {
            el_offset_samples: 2.0,
            dll: LoopFilterConfig::new(2, 1.0, T_COH).unwrap(),
            pll: LoopFilterConfig::new(3, 18.0, T_COH).unwrap(),
            smoothing_window: 100,
            cn0_window: 20,
            slip_doppler_jump_hz: 50.0,
        }
    }
}

/// Correlate one block against the channel's current replicas.
///
/// Pure with respect to the channel: phase advance happens in
/// [`nco_advance`], which closes the epoch.
pub fn integrate_and_dump(
    block: &IfSampleBlock,
    ch: &ChannelState,
    code_table: &[f32],
    el_offset_samples: f64,
) -> Result<CorrelatorOutput, BasebandError> {
    let f_s = block.f_s as f64;
    let want = (f_s * T_COH).round() as usize;
    if block.samples.len() != want {
        return Err(BasebandError::BlockLength {
            got: block.samples.len(),
            want,
        });
    }
    let n = block.samples.len();
    let cps = ch.code_freq / f_s;
    let half_chips = el_offset_samples * CA_CHIP_RATE_HZ / f_s;
    let chi0 = ch.code_phase + 2.0 * CA_CODE_LEN as f64;
    let dphi = 2.0 * std::f64::consts::PI * (ch.f_if + ch.carrier_freq) / f_s;
    let ph0 = 2.0 * std::f64::consts::PI * ch.carrier_phase;
    let (dsin64, dcos64) = dphi.sin_cos();
    let (dsin, dcos) = (dsin64 as f32, dcos64 as f32);

    let mut acc = [0f64; 6];
    let mut part = [0f32; 6];
    let (s0, c0) = ph0.sin_cos();
    let (mut sin_ph, mut cos_ph) = (s0 as f32, c0 as f32);
    let mut chi = chi0;
    let dc = half_chips;
    for (i, &raw) in block.samples.iter().enumerate() {
        let x = raw as f32;
        let xi = x * cos_ph;
        let xq = -x * sin_ph;
        let p = code_table[chi as usize];
        let e = code_table[(chi + dc) as usize];
        let l = code_table[(chi - dc) as usize];
        part[0] += xi * e;
        part[1] += xq * e;
        part[2] += xi * p;
        part[3] += xq * p;
        part[4] += xi * l;
        part[5] += xq * l;
        let ns = sin_ph * dcos + cos_ph * dsin;
        let nc = cos_ph * dcos - sin_ph * dsin;
        sin_ph = ns;
        cos_ph = nc;
        chi += cps;
        if i & 0xfff == 0xfff {
            for (a, p) in acc.iter_mut().zip(part.iter_mut()) {
                *a += *p as f64;
                *p = 0.0;
            }
            let ph = ph0 + dphi * (i as f64 + 1.0);
            sin_ph = ph.sin() as f32;
            cos_ph = ph.cos() as f32;
            chi = chi0 + cps * (i as f64 + 1.0);
        }
    }
    for (a, p) in acc.iter_mut().zip(part.iter()) {
        *a += *p as f64;
    }
    Ok(CorrelatorOutput {
        i_e: acc[0],
        q_e: acc[1],
        i_p: acc[2],
        q_p: acc[3],
        i_l: acc[4],
        q_l: acc[5],
        t_epoch: block.t_start,
        spacing_samples: 2.0 * el_offset_samples,
        half_spacing_chips: half_chips,
    })
}

/// Close one epoch: advance the replica phases by the commanded rates over
/// one coherent interval, apply the direct code-phase correction, and keep
/// the pseudorange and carrier observables consistent with the NCO motion.
pub fn nco_advance(
    ch: &ChannelState,
    code_freq_cmd: f64,
    carrier_freq_cmd: f64,
    phase_correction: f64,
) -> ChannelState {
    let mut next = *ch;
    next.code_phase =
        (ch.code_phase + code_freq_cmd * T_COH + phase_correction).rem_euclid(CA_CODE_LEN as f64);
    next.carrier_phase = (ch.carrier_phase + (ch.f_if + carrier_freq_cmd) * T_COH).rem_euclid(1.0);
    next.code_freq = code_freq_cmd;
    next.carrier_freq = carrier_freq_cmd;
    // Transmit time advances with the replica; receive time by T_coh.
    next.pr_raw = ch.pr_raw + SPEED_OF_LIGHT * T_COH
        - SPEED_OF_LIGHT / CA_CHIP_RATE_HZ * (code_freq_cmd * T_COH + phase_correction);
    // Accumulated carrier grows with range (Doppler negative when closing).
    next.carrier_obs = ch.carrier_obs - carrier_freq_cmd * T_COH;
    next
}

/// Per-epoch measurement snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnssMeasurement {
    pub prn: u8,
    pub pseudorange_raw: f64,
    pub pseudorange_smoothed: f64,
    /// Carrier observable [cycles], increasing with range.
    pub carrier_phase: f64,
    /// Carrier Doppler [Hz].
    pub doppler: f64,
    pub cn0: f64,
    pub t_rx: f64,
    pub lock: bool,
}

/// A full tracking channel: state plus the working memories that the spec
/// types carry implicitly.
pub struct Channel {
    pub state: ChannelState,
    pub cfg: ChannelConfig,
    pub dll_mem: LoopFilterState,
    pub pll_mem: LoopFilterState,
    code_table: Vec<f32>,
    smoother: CarrierSmoother,
    cn0: Cn0Estimator,
    prev_doppler: f64,
    /// Consecutive epochs with an out-of-range composite error.
    pub unlock_count: u32,
    pub slip_flagged: bool,
}

impl Channel {
    pub fn new(code: &CaCode, cfg: ChannelConfig, init: ChannelState) -> Self {
        // Replicated table: two periods of headroom in front, a full block of
        // advance plus tap offsets behind.
        let reps = 9;
        let mut table = Vec::with_capacity(reps * CA_CODE_LEN);
        for _ in 0..reps {
            table.extend(code.chips.iter().map(|&c| c as f32));
        }
        let cn0 = Cn0Estimator::new(cfg.cn0_window, T_COH, init.cn0_est);
        Self {
            state: init,
            cfg,
            dll_mem: LoopFilterState::default(),
            pll_mem: LoopFilterState::seeded(init.carrier_freq),
            code_table: table,
            smoother: CarrierSmoother::new(cfg.smoothing_window),
            cn0,
            prev_doppler: init.carrier_freq,
            unlock_count: 0,
            slip_flagged: false,
        }
    }

    pub fn correlate(&self, block: &IfSampleBlock) -> Result<CorrelatorOutput, BasebandError> {
        integrate_and_dump(block, &self.state, &self.code_table, self.cfg.el_offset_samples)
    }

    /// Advance the NCO with new commands, then refresh the measurement-side
    /// state (C/N0, slip flag, smoothed pseudorange).
    pub fn close_epoch(
        &mut self,
        corr: &CorrelatorOutput,
        code_freq_cmd: f64,
        carrier_freq_cmd: f64,
        phase_correction: f64,
    ) {
        self.slip_flagged =
            (carrier_freq_cmd - self.prev_doppler).abs() > self.cfg.slip_doppler_jump_hz;
        self.prev_doppler = carrier_freq_cmd;
        self.state = nco_advance(&self.state, code_freq_cmd, carrier_freq_cmd, phase_correction);
        self.state.cn0_est = self.cn0.update(corr.i_p, corr.q_p);
        let carrier_m = self.state.carrier_obs * crate::constants::L1_WAVELENGTH_M;
        self.smoother
            .update(self.state.pr_raw, carrier_m, self.slip_flagged);
    }

    pub fn measurement(&self, t_rx: f64) -> GnssMeasurement {
        GnssMeasurement {
            prn: self.state.prn,
            pseudorange_raw: self.state.pr_raw,
            pseudorange_smoothed: self.smoother.value(),
            carrier_phase: self.state.carrier_obs,
            doppler: self.state.carrier_freq,
            cn0: self.state.cn0_est,
            t_rx,
            lock: self.state.lock,
        }
    }
}
