//! Base-station observations: measurement-level synthesis and the simple
//! CSV exchange format standing in for RTCM.

use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::PositioningError;
use crate::constants::{L1_WAVELENGTH_M, SPEED_OF_LIGHT};
use crate::constellation::{AtmosphereModel, SyntheticEphemeris};
use crate::signal::range_and_rate_at;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseObservation {
    pub prn: u8,
    pub pseudorange: f64,
    /// Carrier phase [cycles], increasing with range.
    pub carrier_phase: f64,
    pub cn0: f64,
}

/// One epoch of base-station data (1 Hz cadence, surveyed position).
#[derive(Debug, Clone, PartialEq)]
pub struct BaseStationEpoch {
    pub t: f64,
    pub base_pos_ecef: Vector3<f64>,
    pub obs: Vec<BaseObservation>,
}

impl BaseStationEpoch {
    pub fn find(&self, prn: u8) -> Option<&BaseObservation> {
        self.obs.iter().find(|o| o.prn == prn)
    }
}

/// Synthesis settings for base measurements.
#[derive(Debug, Clone)]
pub struct BaseSynthConfig {
    pub base_pos_ecef: Vector3<f64>,
    /// Base receiver clock bias at t=0 [s] and drift [s/s].
    pub clock_bias_s: f64,
    pub clock_drift_sps: f64,
    pub code_noise_m: f64,
    pub carrier_noise_cycles: f64,
    pub seed: u64,
}

/// Generate one epoch of base observations from the same ephemeris and
/// atmosphere models the rover-side predictions use.
pub fn synthesize_base_epoch(
    cfg: &BaseSynthConfig,
    eph: &SyntheticEphemeris,
    atmos: &AtmosphereModel,
    prns: &[u8],
    t: f64,
) -> BaseStationEpoch {
    let clk = cfg.clock_bias_s + cfg.clock_drift_sps * t;
    let mut obs = Vec::new();
    for &prn in prns {
        let Ok(info) = range_and_rate_at(eph, atmos, prn, &cfg.base_pos_ecef, t - clk) else {
            continue;
        };
        let mut rng = ChaCha8Rng::seed_from_u64(
            cfg.seed ^ (prn as u64) << 32 ^ ((t * 1000.0).round() as i64 as u64),
        );
        let code_noise: f64 = rng.sample::<f64, _>(StandardNormal) * cfg.code_noise_m;
        let carr_noise: f64 = rng.sample::<f64, _>(StandardNormal) * cfg.carrier_noise_cycles;
        let common = info.range_m + SPEED_OF_LIGHT * (clk - info.sat_clock_bias) + info.tropo_m;
        let pr = common + info.iono_m + code_noise;
        // Per-PRN constant ambiguity, deterministic from the seed.
        let n_amb = ((cfg.seed ^ (prn as u64).wrapping_mul(2654435761)) % 100_000) as f64;
        let cp = (common - info.iono_m) / L1_WAVELENGTH_M + n_amb + carr_noise;
        obs.push(BaseObservation {
            prn,
            pseudorange: pr,
            carrier_phase: cp,
            cn0: 48.0,
        });
    }
    BaseStationEpoch {
        t,
        base_pos_ecef: cfg.base_pos_ecef,
        obs,
    }
}

/// Write epochs as CSV: a header line with the base position, then
/// `t,prn,pseudorange,carrier_phase,cn0` rows.
pub fn write_base_csv(path: &Path, epochs: &[BaseStationEpoch]) -> Result<(), PositioningError> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    let p = epochs
        .first()
        .map(|e| e.base_pos_ecef)
        .unwrap_or_else(Vector3::zeros);
    writeln!(w, "# base_pos_ecef,{:.4},{:.4},{:.4}", p.x, p.y, p.z)?;
    writeln!(w, "t,prn,pseudorange,carrier_phase,cn0")?;
    for e in epochs {
        for o in &e.obs {
            writeln!(
                w,
                "{:.3},{},{:.4},{:.6},{:.1}",
                e.t, o.prn, o.pseudorange, o.carrier_phase, o.cn0
            )?;
        }
    }
    Ok(())
}

/// Read a file produced by [`write_base_csv`].
pub fn read_base_csv(path: &Path) -> Result<Vec<BaseStationEpoch>, PositioningError> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut base_pos = None;
    let mut epochs: Vec<BaseStationEpoch> = Vec::new();
    for line in f.lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix("# base_pos_ecef,") {
            let xs: Vec<f64> = rest
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| PositioningError::BadCsv(e.to_string()))?;
            if xs.len() != 3 {
                return Err(PositioningError::BadCsv("bad base position".into()));
            }
            base_pos = Some(Vector3::new(xs[0], xs[1], xs[2]));
            continue;
        }
        if line.starts_with('t') || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(PositioningError::BadCsv(format!("bad row: {line}")));
        }
        let t: f64 = cols[0].parse().map_err(|_| PositioningError::BadCsv(line.clone()))?;
        let prn: u8 = cols[1].parse().map_err(|_| PositioningError::BadCsv(line.clone()))?;
        let pr: f64 = cols[2].parse().map_err(|_| PositioningError::BadCsv(line.clone()))?;
        let cp: f64 = cols[3].parse().map_err(|_| PositioningError::BadCsv(line.clone()))?;
        let cn0: f64 = cols[4].parse().map_err(|_| PositioningError::BadCsv(line.clone()))?;
        let pos = base_pos.ok_or_else(|| PositioningError::BadCsv("missing header".into()))?;
        match epochs.last_mut() {
            Some(e) if (e.t - t).abs() < 1e-9 => e.obs.push(BaseObservation {
                prn,
                pseudorange: pr,
                carrier_phase: cp,
                cn0,
            }),
            _ => epochs.push(BaseStationEpoch {
                t,
                base_pos_ecef: pos,
                obs: vec![BaseObservation {
                    prn,
                    pseudorange: pr,
                    carrier_phase: cp,
                    cn0,
                }],
            }),
        }
    }
    Ok(epochs)
}
