//! Differential corrections for the absolute-position-aided code prediction:
//! per-PRN clock-plus-systematic terms from base-station residuals and the
//! between-satellite single-difference multipath estimate.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::Vector3;

use super::{BaseStationEpoch, PositioningError, SatGeometry};

/// Per-PRN correction terms entering the code-phase prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionSet {
    /// Receiver-clock plus systematic (satellite clock, atmosphere) error per
    /// PRN [m].
    pub clock_plus_sys: Vec<(u8, f64)>,
    /// Estimated slowly-varying code bias per PRN [m]; zero when the
    /// estimator is disabled.
    pub mp_bias: Vec<(u8, f64)>,
    /// Weight of the multipath term in the prediction.
    pub kappa_d: f64,
    pub master_prn: u8,
    /// False when the master satellite was unavailable and the set is a
    /// placeholder.
    pub valid: bool,
    pub t: f64,
}

impl CorrectionSet {
    pub fn clock_plus_sys_for(&self, prn: u8) -> Option<f64> {
        self.clock_plus_sys.iter().find(|(p, _)| *p == prn).map(|(_, v)| *v)
    }

    pub fn mp_bias_for(&self, prn: u8) -> f64 {
        self.mp_bias
            .iter()
            .find(|(p, _)| *p == prn)
            .map(|(_, v)| *v)
            .unwrap_or(0.0)
    }

    /// Full pseudorange prediction for one PRN given a geometric range
    /// prediction [m].
    pub fn predict_pseudorange(&self, prn: u8, range_hat: f64) -> Option<f64> {
        let cps = self.clock_plus_sys_for(prn)?;
        Some(range_hat + cps - self.kappa_d * self.mp_bias_for(prn))
    }
}

/// Reconstruct the clock-plus-systematic term per PRN: the base residual
/// against its surveyed position carries the satellite clock and atmosphere;
/// the rover's master-satellite single difference supplies the local clock.
pub fn base_corrections(
    rover_pr: &[(u8, f64)],
    base: &BaseStationEpoch,
    sats: &[SatGeometry],
    master_prn: u8,
    user_pos_est: &Vector3<f64>,
    kappa_d: f64,
) -> Result<CorrectionSet, PositioningError> {
    let master_geom = sats
        .iter()
        .find(|s| s.prn == master_prn)
        .ok_or(PositioningError::MasterMissing(master_prn, "geometry"))?;
    let master_base = base
        .find(master_prn)
        .ok_or(PositioningError::MasterMissing(master_prn, "base"))?;
    let (_, master_rover_pr) = rover_pr
        .iter()
        .find(|(p, _)| *p == master_prn)
        .ok_or(PositioningError::MasterMissing(master_prn, "rover"))?;

    let base_resid = |prn: u8| -> Option<f64> {
        let o = base.find(prn)?;
        let s = sats.iter().find(|s| s.prn == prn)?;
        Some(o.pseudorange - (s.sat_pos - base.base_pos_ecef).norm())
    };

    let master_base_resid =
        master_base.pseudorange - (master_geom.sat_pos - base.base_pos_ecef).norm();
    let r_hat_master = (master_geom.sat_pos - user_pos_est).norm();
    let local_clock_est = master_rover_pr - r_hat_master - master_base_resid;

    let clock_plus_sys = rover_pr
        .iter()
        .filter_map(|&(prn, _)| Some((prn, base_resid(prn)? + local_clock_est)))
        .collect();

    Ok(CorrectionSet {
        clock_plus_sys,
        mp_bias: Vec::new(),
        kappa_d,
        master_prn,
        valid: true,
        t: base.t,
    })
}

/// Between-satellite single-difference multipath estimator with a moving
/// average matched to the slow bias dynamics it targets.
#[derive(Debug, Clone)]
pub struct MultipathEstimator {
    window: usize,
    history: BTreeMap<u8, VecDeque<f64>>,
    pub enabled: bool,
}

impl MultipathEstimator {
    /// `window` in correction epochs (10 at the 1 Hz cadence).
    pub fn new(window: usize, enabled: bool) -> Self {
        Self {
            window,
            history: BTreeMap::new(),
            enabled,
        }
    }

    /// Update from the current rover pseudoranges and corrections; returns
    /// per-PRN smoothed biases [m]. The master's own residual is zero by
    /// construction of the clock term, so the single difference reduces to
    /// the corrected residual itself.
    pub fn update(
        &mut self,
        rover_pr: &[(u8, f64)],
        sats: &[SatGeometry],
        corrections: &CorrectionSet,
        user_pos_est: &Vector3<f64>,
    ) -> Vec<(u8, f64)> {
        if !self.enabled {
            return rover_pr.iter().map(|&(p, _)| (p, 0.0)).collect();
        }
        let resid = |prn: u8, pr: f64| -> Option<f64> {
            let s = sats.iter().find(|s| s.prn == prn)?;
            let cps = corrections.clock_plus_sys_for(prn)?;
            Some(pr - (s.sat_pos - user_pos_est).norm() - cps)
        };
        let master_resid = rover_pr
            .iter()
            .find(|(p, _)| *p == corrections.master_prn)
            .and_then(|&(p, pr)| resid(p, pr))
            .unwrap_or(0.0);
        let mut out = Vec::new();
        for &(prn, pr) in rover_pr {
            let sd = match resid(prn, pr) {
                Some(r) => r - master_resid,
                None => continue,
            };
            let h = self.history.entry(prn).or_default();
            h.push_back(sd);
            while h.len() > self.window {
                h.pop_front();
            }
            let mean = h.iter().sum::<f64>() / h.len() as f64;
            out.push((prn, mean));
        }
        out
    }

    pub fn reset(&mut self) {
        self.history.clear();
    }
}
