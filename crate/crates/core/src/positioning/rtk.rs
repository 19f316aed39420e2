//! Float RTK: a double-difference code+carrier EKF with real-valued
//! ambiguities, master satellite = highest elevation.

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use super::{BaseStationEpoch, PositioningError, SatGeometry};
use crate::constants::L1_WAVELENGTH_M;

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct RtkConfig {
    /// Per-receiver code noise [m].
    pub code_noise_m: f64,
    /// Per-receiver carrier noise [cycles].
    pub carrier_noise_cycles: f64,
    /// Position random-walk spectral density [m^2/s] (static tuning).
    pub pos_process_noise: f64,
    pub init_pos_sigma_m: f64,
    pub init_amb_sigma_cycles: f64,
}

impl Default for RtkConfig {
    fn default() -> Self {
        Self {
            code_noise_m: 1.0,
            carrier_noise_cycles: 0.01,
            pos_process_noise: 1e-4,
            init_pos_sigma_m: 20.0,
            init_amb_sigma_cycles: 100.0,
        }
    }
}

/// One rover observation entering the RTK filter.
#[derive(Debug, Clone, Copy)]
pub struct RtkObs {
    pub prn: u8,
    pub pseudorange: f64,
    /// Carrier [cycles], increasing with range.
    pub carrier_phase: f64,
}

#[derive(Debug, Clone)]
pub struct RtkSolution {
    pub p_ecef: Vector3<f64>,
    /// Double-difference float ambiguities [cycles] per non-master PRN.
    pub float_ambiguities: Vec<(u8, f64)>,
    pub master_prn: u8,
    /// 3D position standard deviation from the covariance [m].
    pub pos_sigma_m: f64,
    pub cov_trace: f64,
    pub t: f64,
}

struct RtkState {
    p: Vector3<f64>,
    /// (prn, ambiguity cycles); state order follows this vector after the
    /// three position components.
    ambs: Vec<(u8, f64)>,
    cov: DMatrix<f64>,
    master: u8,
    t: f64,
}

/// Stateful float-RTK engine.
pub struct FloatRtk {
    pub cfg: RtkConfig,
    state: Option<RtkState>,
}

struct DdSet {
    master: u8,
    /// (prn, dd_code_m, dd_carrier_cycles, e_i, e_m) with unit vectors from
    /// the rover position estimate.
    rows: Vec<(u8, f64, f64)>,
}

impl FloatRtk {
    pub fn new(cfg: RtkConfig) -> Self {
        Self { cfg, state: None }
    }

    pub fn solution(&self) -> Option<RtkSolution> {
        self.state.as_ref().map(|s| self.export(s))
    }

    fn export(&self, s: &RtkState) -> RtkSolution {
        let pos_var = s.cov[(0, 0)] + s.cov[(1, 1)] + s.cov[(2, 2)];
        RtkSolution {
            p_ecef: s.p,
            float_ambiguities: s.ambs.clone(),
            master_prn: s.master,
            pos_sigma_m: pos_var.max(0.0).sqrt(),
            cov_trace: s.cov.trace(),
            t: s.t,
        }
    }

    fn form_dds(
        rover: &[RtkObs],
        base: &BaseStationEpoch,
        sats: &[SatGeometry],
    ) -> Result<DdSet, PositioningError> {
        // Common PRNs with geometry, sorted by elevation descending.
        let mut common: Vec<(u8, f64)> = rover
            .iter()
            .filter_map(|r| {
                let s = sats.iter().find(|s| s.prn == r.prn)?;
                base.find(r.prn)?;
                Some((r.prn, s.elevation))
            })
            .collect();
        if common.len() < 5 {
            return Err(PositioningError::TooFewSatellites {
                need: 5,
                got: common.len(),
            });
        }
        common.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let master = common[0].0;

        let sd = |prn: u8| -> (f64, f64) {
            let r = rover.iter().find(|r| r.prn == prn).unwrap();
            let b = base.find(prn).unwrap();
            (
                r.pseudorange - b.pseudorange,
                r.carrier_phase - b.carrier_phase,
            )
        };
        let (sd_code_m, sd_carr_m) = sd(master);
        let rows = common[1..]
            .iter()
            .map(|&(prn, _)| {
                let (c, p) = sd(prn);
                (prn, c - sd_code_m, p - sd_carr_m)
            })
            .collect();
        Ok(DdSet { master, rows })
    }

    /// Predicted DD geometric range for PRN i vs the master [m].
    fn dd_range(
        p: &Vector3<f64>,
        base_pos: &Vector3<f64>,
        s_i: &SatGeometry,
        s_m: &SatGeometry,
    ) -> f64 {
        ((s_i.sat_pos - p).norm() - (s_i.sat_pos - base_pos).norm())
            - ((s_m.sat_pos - p).norm() - (s_m.sat_pos - base_pos).norm())
    }

    /// Run one 1 Hz epoch. `slips` lists PRNs whose rover carrier is flagged
    /// discontinuous since the previous epoch.
    pub fn update(
        &mut self,
        t: f64,
        rover: &[RtkObs],
        base: &BaseStationEpoch,
        sats: &[SatGeometry],
        init_pos: &Vector3<f64>,
        slips: &[u8],
    ) -> Result<RtkSolution, PositioningError> {
        let dds = Self::form_dds(rover, base, sats)?;
        let geom = |prn: u8| sats.iter().find(|s| s.prn == prn).unwrap();
        let s_m = *geom(dds.master);

        // (Re)build or reconcile the state.
        let mut st = match self.state.take() {
            None => {
                let p0 = *init_pos;
                let ambs: Vec<(u8, f64)> = dds
                    .rows
                    .iter()
                    .map(|&(prn, dd_c, dd_p)| (prn, dd_p - dd_c / L1_WAVELENGTH_M))
                    .collect();
                let n = 3 + ambs.len();
                let mut cov = DMatrix::zeros(n, n);
                for i in 0..3 {
                    cov[(i, i)] = self.cfg.init_pos_sigma_m.powi(2);
                }
                for i in 3..n {
                    cov[(i, i)] = self.cfg.init_amb_sigma_cycles.powi(2);
                }
                RtkState {
                    p: p0,
                    ambs,
                    cov,
                    master: dds.master,
                    t,
                }
            }
            Some(mut st) => {
                let dt = (t - st.t).max(0.0);
                for i in 0..3 {
                    st.cov[(i, i)] += self.cfg.pos_process_noise * dt;
                }
                st.t = t;

                // Master change: re-map ambiguities N'_i = N_i - N_newmaster.
                if st.master != dds.master {
                    if let Some(new_m_idx) = st.ambs.iter().position(|a| a.0 == dds.master) {
                        let n_old = st.ambs.len();
                        let n_m = st.ambs[new_m_idx].1;
                        let mut t_mat = DMatrix::zeros(3 + n_old, 3 + n_old);
                        for i in 0..3 {
                            t_mat[(i, i)] = 1.0;
                        }
                        let mut new_ambs = Vec::new();
                        let mut new_row = 3;
                        for (j, &(prn, n)) in st.ambs.iter().enumerate() {
                            if j == new_m_idx {
                                continue;
                            }
                            t_mat[(new_row, 3 + j)] = 1.0;
                            t_mat[(new_row, 3 + new_m_idx)] = -1.0;
                            new_ambs.push((prn, n - n_m));
                            new_row += 1;
                        }
                        // The old master becomes an ordinary satellite:
                        // N_oldmaster' = -N_newmaster.
                        t_mat[(new_row, 3 + new_m_idx)] = -1.0;
                        new_ambs.push((st.master, -n_m));
                        new_row += 1;
                        let t_mat = t_mat.rows(0, new_row).columns(0, 3 + n_old).into_owned();
                        st.cov = &t_mat * &st.cov * t_mat.transpose();
                        st.ambs = new_ambs;
                    } else {
                        // Unknown new master: start its relative set fresh.
                        st.ambs.clear();
                        let n = 3;
                        let mut cov = DMatrix::zeros(n, n);
                        for i in 0..3 {
                            cov[(i, i)] = st.cov[(i, i)];
                        }
                        st.cov = cov;
                    }
                    st.master = dds.master;
                }
                st
            }
        };

        // Add new PRNs / drop vanished ones / reset slipped ones.
        let present: Vec<u8> = dds.rows.iter().map(|r| r.0).collect();
        let keep: Vec<usize> = st
            .ambs
            .iter()
            .enumerate()
            .filter(|(_, a)| present.contains(&a.0))
            .map(|(i, _)| i)
            .collect();
        if keep.len() != st.ambs.len() {
            let idx: Vec<usize> = (0..3).chain(keep.iter().map(|&i| 3 + i)).collect();
            st.cov = st.cov.select_rows(&idx).select_columns(&idx);
            st.ambs = keep.iter().map(|&i| st.ambs[i]).collect();
        }
        for &(prn, dd_c, dd_p) in &dds.rows {
            let is_new = !st.ambs.iter().any(|a| a.0 == prn);
            let slipped = slips.contains(&prn);
            if is_new || slipped {
                let init_amb = dd_p - dd_c / L1_WAVELENGTH_M;
                if is_new {
                    st.ambs.push((prn, init_amb));
                    let n = st.cov.nrows();
                    st.cov = st.cov.clone().insert_row(n, 0.0).insert_column(n, 0.0);
                    st.cov[(n, n)] = self.cfg.init_amb_sigma_cycles.powi(2);
                } else {
                    let j = st.ambs.iter().position(|a| a.0 == prn).unwrap();
                    st.ambs[j].1 = init_amb;
                    let n = st.cov.nrows();
                    for k in 0..n {
                        st.cov[(3 + j, k)] = 0.0;
                        st.cov[(k, 3 + j)] = 0.0;
                    }
                    st.cov[(3 + j, 3 + j)] = self.cfg.init_amb_sigma_cycles.powi(2);
                }
            }
        }

        // Sequential scalar updates: code then carrier per PRN.
        let r_code = 4.0 * self.cfg.code_noise_m.powi(2);
        let r_carr = 4.0 * (self.cfg.carrier_noise_cycles * L1_WAVELENGTH_M).powi(2);
        let n_states = 3 + st.ambs.len();
        for &(prn, dd_c, dd_p) in &dds.rows {
            let s_i = *geom(prn);
            let amb_idx = 3 + st.ambs.iter().position(|a| a.0 == prn).unwrap();
            for pass in 0..2 {
                let g = Self::dd_range(&st.p, &base.base_pos_ecef, &s_i, &s_m);
                let e_i = (s_i.sat_pos - st.p).normalize();
                let e_m = (s_m.sat_pos - st.p).normalize();
                let grad = e_m - e_i;
                let mut h = DVector::zeros(n_states);
                h[0] = grad.x;
                h[1] = grad.y;
                h[2] = grad.z;
                let (z, r) = if pass == 0 {
                    (dd_c - g, r_code)
                } else {
                    h[amb_idx] = L1_WAVELENGTH_M;
                    let amb = st.ambs[amb_idx - 3].1;
                    (
                        dd_p * L1_WAVELENGTH_M - (g + L1_WAVELENGTH_M * amb),
                        r_carr,
                    )
                };
                let ph = &st.cov * &h;
                let s_inn = (h.transpose() * &ph)[(0, 0)] + r;
                if s_inn <= 0.0 {
                    return Err(PositioningError::SingularGeometry);
                }
                let k = ph / s_inn;
                st.p += Vector3::new(k[0], k[1], k[2]) * z;
                for (j, a) in st.ambs.iter_mut().enumerate() {
                    a.1 += k[3 + j] * z;
                }
                let kh = &k * h.transpose();
                let upd = DMatrix::identity(n_states, n_states) - kh;
                st.cov = &upd * &st.cov;
                // Keep the covariance symmetric.
                st.cov = (&st.cov + st.cov.transpose()) * 0.5;
            }
        }

        let out = self.export(&st);
        self.state = Some(st);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::SPEED_OF_LIGHT;
    use crate::oracle::ReferenceDdEkf;
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// Synthetic measurement-level world: satellites on fixed lines of sight,
    /// slow known motion, plain geometric ranges plus clocks and noise.
    struct World {
        sats: Vec<SatGeometry>,
        user: Vector3<f64>,
        base_pos: Vector3<f64>,
    }

    fn make_world(baseline_m: f64) -> World {
        let user = crate::constellation::geodetic_to_ecef(0.89, -1.99, 100.0);
        let base_pos = user + Vector3::new(baseline_m, baseline_m * 0.3, -baseline_m * 0.1);
        let (lat, lon, _) = crate::constellation::ecef_to_geodetic(&user);
        let basis = crate::constellation::enu_basis(lat, lon).transpose();
        let angles = [
            (75.0, 10.0),
            (60.0, 80.0),
            (50.0, 170.0),
            (42.0, 250.0),
            (30.0, 320.0),
            (22.0, 120.0),
            (15.0, 200.0),
            (55.0, 290.0),
        ];
        let sats = angles
            .iter()
            .enumerate()
            .map(|(i, &(el_d, az_d))| {
                let el = el_d * std::f64::consts::PI / 180.0;
                let az = az_d * std::f64::consts::PI / 180.0;
                let dir = basis * Vector3::new(el.cos() * az.sin(), el.cos() * az.cos(), el.sin());
                let pos = user + dir * 2.2e7;
                // MEO-like tangential motion so the geometry evolves.
                let tangent = dir.cross(&Vector3::new(0.3, -0.5, 0.8)).normalize();
                SatGeometry {
                    prn: i as u8 + 1,
                    sat_pos: pos,
                    sat_vel: tangent * 2600.0,
                    sat_clock_bias: 1e-6 * i as f64,
                    sat_clock_drift: 0.0,
                    atmos_delay_m: 3.0 + 0.5 * i as f64,
                    elevation: el,
                }
            })
            .collect();
        World {
            sats,
            user,
            base_pos,
        }
    }

    /// Satellite set propagated to time t.
    fn sats_at(w: &World, t: f64) -> Vec<SatGeometry> {
        w.sats
            .iter()
            .map(|s| SatGeometry {
                sat_pos: s.sat_pos + s.sat_vel * t,
                ..*s
            })
            .collect()
    }

    fn world_epoch(
        w: &World,
        t: f64,
        code_sigma: f64,
        carr_sigma: f64,
        seed: u64,
    ) -> (Vec<RtkObs>, BaseStationEpoch) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (t as u64).wrapping_mul(0x9E3779B9));
        let rover_clk = 30.0 + 0.1 * t; // meters
        let base_clk = -20.0 + 0.05 * t;
        let mut rover = Vec::new();
        let mut base_obs = Vec::new();
        for s in &sats_at(w, t) {
            let r_r = (s.sat_pos - w.user).norm();
            let r_b = (s.sat_pos - w.base_pos).norm();
            let sat_clk = SPEED_OF_LIGHT * s.sat_clock_bias;
            let nr: f64 = rng.sample(StandardNormal);
            let nb: f64 = rng.sample(StandardNormal);
            let cr: f64 = rng.sample(StandardNormal);
            let cb: f64 = rng.sample(StandardNormal);
            rover.push(RtkObs {
                prn: s.prn,
                pseudorange: r_r + rover_clk - sat_clk + s.atmos_delay_m + code_sigma * nr,
                carrier_phase: (r_r + rover_clk - sat_clk - s.atmos_delay_m) / L1_WAVELENGTH_M
                    + 1000.0 * s.prn as f64
                    + carr_sigma * cr,
            });
            base_obs.push(crate::positioning::BaseObservation {
                prn: s.prn,
                pseudorange: r_b + base_clk - sat_clk + s.atmos_delay_m + code_sigma * nb,
                carrier_phase: (r_b + base_clk - sat_clk - s.atmos_delay_m) / L1_WAVELENGTH_M
                    + 77.0 * s.prn as f64
                    + carr_sigma * cb,
                cn0: 48.0,
            });
        }
        (
            rover,
            BaseStationEpoch {
                t,
                base_pos_ecef: w.base_pos,
                obs: base_obs,
            },
        )
    }

    #[test]
    fn zero_baseline_noiseless_converges_below_centimeter() {
        let w = make_world(0.0);
        let mut rtk = FloatRtk::new(RtkConfig::default());
        let init = w.user + Vector3::new(5.0, -3.0, 2.0);
        let mut sol = None;
        for k in 0..10 {
            let (rover, base) = world_epoch(&w, k as f64, 0.0, 0.0, 1);
            let sats = sats_at(&w, k as f64);
            sol = Some(rtk.update(k as f64, &rover, &base, &sats, &init, &[]).unwrap());
        }
        let err = (sol.unwrap().p_ecef - w.user).norm();
        assert!(err < 0.01, "zero-baseline error {err}");
    }

    /// Hatch-smooth a code series against its carrier, mirroring what the
    /// tracking channels feed the RTK engine.
    struct Smoother {
        state: std::collections::BTreeMap<u8, (f64, f64, u32)>,
        window: u32,
    }
    impl Smoother {
        fn new(window: u32) -> Self {
            Self {
                state: Default::default(),
                window,
            }
        }
        fn push(&mut self, prn: u8, code: f64, carrier_cycles: f64) -> f64 {
            let carrier_m = carrier_cycles * L1_WAVELENGTH_M;
            match self.state.get_mut(&prn) {
                None => {
                    self.state.insert(prn, (code, carrier_m, 1));
                    code
                }
                Some((sm, last_c, n)) => {
                    *n = (*n + 1).min(self.window);
                    let k = *n as f64;
                    *sm = code / k + (k - 1.0) / k * (*sm + (carrier_m - *last_c));
                    *last_c = carrier_m;
                    *sm
                }
            }
        }
    }

    #[test]
    fn noisy_short_baseline_matches_reference_filter() {
        let w = make_world(1000.0);
        let cfg = RtkConfig::default();
        let mut rtk = FloatRtk::new(cfg);
        let mut reference = ReferenceDdEkf::new(
            cfg.code_noise_m,
            cfg.carrier_noise_cycles,
            cfg.pos_process_noise,
            cfg.init_pos_sigma_m,
            cfg.init_amb_sigma_cycles,
        );
        let init = w.user + Vector3::new(8.0, -6.0, 4.0);
        let mut errs = Vec::new();
        let mut ref_errs = Vec::new();
        let mut sm_rover = Smoother::new(100);
        let mut sm_base = Smoother::new(100);
        for k in 0..60 {
            let (mut rover, mut base) = world_epoch(&w, k as f64, 1.0, 0.01, 42);
            // The receiver hands the RTK engine carrier-smoothed code.
            for r in rover.iter_mut() {
                r.pseudorange = sm_rover.push(r.prn, r.pseudorange, r.carrier_phase);
            }
            for b in base.obs.iter_mut() {
                b.pseudorange = sm_base.push(b.prn, b.pseudorange, b.carrier_phase);
            }
            let sats = sats_at(&w, k as f64);
            let sol = rtk.update(k as f64, &rover, &base, &sats, &init, &[]).unwrap();
            let ref_obs: Vec<(u8, f64, f64)> = rover
                .iter()
                .map(|r| (r.prn, r.pseudorange, r.carrier_phase))
                .collect();
            let base_obs: Vec<(u8, f64, f64)> = base
                .obs
                .iter()
                .map(|b| (b.prn, b.pseudorange, b.carrier_phase))
                .collect();
            let sat_in: Vec<(u8, Vector3<f64>, f64)> = sats
                .iter()
                .map(|s| (s.prn, s.sat_pos, s.elevation))
                .collect();
            let ref_p = reference.step(k as f64, &ref_obs, &base_obs, &base.base_pos_ecef, &sat_in, &init);
            errs.push((sol.p_ecef - w.user).norm_squared());
            ref_errs.push((ref_p - w.user).norm_squared());
        }
        let rmse = (errs.iter().sum::<f64>() / errs.len() as f64).sqrt();
        let ref_rmse = (ref_errs.iter().sum::<f64>() / ref_errs.len() as f64).sqrt();
        assert!(rmse < 0.2, "float RTK 3D RMSE {rmse}");
        assert!(
            (rmse - ref_rmse).abs() < 0.1 * ref_rmse.max(rmse),
            "rmse {rmse} vs reference {ref_rmse}"
        );
    }

    #[test]
    fn covariance_trace_nonincreasing_without_process_noise() {
        let w = make_world(0.0);
        let mut cfg = RtkConfig::default();
        cfg.pos_process_noise = 0.0;
        let mut rtk = FloatRtk::new(cfg);
        let init = w.user;
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let (rover, base) = world_epoch(&w, k as f64, 0.0, 0.0, 3);
            let sats = sats_at(&w, k as f64);
            let sol = rtk.update(k as f64, &rover, &base, &sats, &init, &[]).unwrap();
            assert!(sol.cov_trace <= prev + 1e-9, "trace grew at {k}");
            prev = sol.cov_trace;
        }
    }

    #[test]
    fn slip_reinitializes_one_ambiguity() {
        let w = make_world(100.0);
        let mut rtk = FloatRtk::new(RtkConfig::default());
        let init = w.user + Vector3::new(5.0, 0.0, 0.0);
        let mut pre_sigma = 0.0;
        for k in 0..30 {
            let (mut rover, base) = world_epoch(&w, k as f64, 0.3, 0.005, 9);
            let slips: Vec<u8> = if k == 20 { vec![4] } else { vec![] };
            if k >= 20 {
                // A real slip: half-cycle jump on PRN 4 from epoch 20 on.
                for r in rover.iter_mut() {
                    if r.prn == 4 {
                        r.carrier_phase += 7.5;
                    }
                }
            }
            let sats = sats_at(&w, k as f64);
            let sol = rtk.update(k as f64, &rover, &base, &sats, &init, &slips).unwrap();
            if k == 19 {
                pre_sigma = (sol.p_ecef - w.user).norm().max(0.05);
            }
            if k >= 25 {
                let err = (sol.p_ecef - w.user).norm();
                assert!(
                    err < 2.0 * pre_sigma.max(0.1),
                    "post-slip error {err} vs pre {pre_sigma}"
                );
            }
        }
    }

    #[test]
    fn too_few_common_satellites() {
        let w = make_world(0.0);
        let mut rtk = FloatRtk::new(RtkConfig::default());
        let (rover, base) = world_epoch(&w, 0.0, 0.0, 0.0, 1);
        let r = rtk.update(0.0, &rover[..4], &base, &w.sats, &w.user, &[]);
        assert!(r.is_err());
    }

    #[test]
    fn master_loss_remaps_ambiguities() {
        let w = make_world(10.0);
        let mut rtk = FloatRtk::new(RtkConfig::default());
        let init = w.user + Vector3::new(3.0, 1.0, -2.0);
        for k in 0..10 {
            let (rover, base) = world_epoch(&w, k as f64, 0.2, 0.005, 21);
            let sats = sats_at(&w, k as f64);
            rtk.update(k as f64, &rover, &base, &sats, &init, &[]).unwrap();
        }
        // Drop the master (highest elevation = PRN 1) from view.
        for k in 10..20 {
            let (rover, base) = world_epoch(&w, k as f64, 0.2, 0.005, 21);
            let rover: Vec<RtkObs> = rover.into_iter().filter(|r| r.prn != 1).collect();
            let sats = sats_at(&w, k as f64);
            let sol = rtk.update(k as f64, &rover, &base, &sats, &init, &[]).unwrap();
            assert_ne!(sol.master_prn, 1);
            let err = (sol.p_ecef - w.user).norm();
            assert!(err < 0.5, "after master change error {err}");
        }
    }
}
