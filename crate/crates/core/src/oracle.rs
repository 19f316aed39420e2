//! Independent reference implementations used by the test suites.
//!
//! Nothing in the production pipeline may call into this module; every
//! function here deliberately re-derives its result through a different
//! route (finer steps, brute force, closed forms) than the code it checks.

use nalgebra::{Matrix3, UnitQuaternion, Vector3};

use crate::constants::OMEGA_IE;

/// Fine-step ECEF strapdown integrator with exact (Rodrigues) rotations and
/// midpoint force sampling. `imu(t)` returns the exact body angular rate and
/// specific force at time `t`.
pub fn fine_step_mechanize(
    p0: &Vector3<f64>,
    v0: &Vector3<f64>,
    c0: &Matrix3<f64>,
    imu: impl Fn(f64) -> (Vector3<f64>, Vector3<f64>),
    t_total: f64,
    dt: f64,
) -> (Vector3<f64>, Vector3<f64>, Matrix3<f64>) {
    let mut p = *p0;
    let mut v = *v0;
    let mut q = UnitQuaternion::from_matrix(c0);
    let omega = Vector3::new(0.0, 0.0, OMEGA_IE);
    let q_earth_full = UnitQuaternion::from_scaled_axis(-omega * dt);
    let q_earth_half = UnitQuaternion::from_scaled_axis(-omega * (dt * 0.5));
    let steps = (t_total / dt).round() as usize;
    for i in 0..steps {
        let t_mid = (i as f64 + 0.5) * dt;
        let (w, f) = imu(t_mid);
        let q_body_half = UnitQuaternion::from_scaled_axis(w * (dt * 0.5));
        let q_mid = q_earth_half * q * q_body_half;
        let g = crate::ins::gravity_ecef(&p).expect("oracle gravity");
        let a = q_mid.to_rotation_matrix() * f + g - 2.0 * omega.cross(&v);
        let v_next = v + a * dt;
        p += (v + v_next) * (dt * 0.5);
        v = v_next;
        q = q_earth_full * q * UnitQuaternion::from_scaled_axis(w * dt);
    }
    (p, v, q.to_rotation_matrix().into_inner())
}

/// Continuous triangle autocorrelation of an ideal +/-1 spreading code,
/// normalized to 1 at zero lag. `x` in chips.
pub fn triangle_acf(x: f64) -> f64 {
    let a = x.abs();
    if a < 1.0 {
        1.0 - a
    } else {
        0.0
    }
}

/// Discrete C/A-code crosscorrelation of a sampled replica against a sampled
/// signal at a fractional chip offset, brute force. Returns the normalized
/// correlation for `n_samples` at `samples_per_chip`.
pub fn discrete_acf(code: &[i8], offset_chips: f64, samples_per_chip: f64, n_samples: usize) -> f64 {
    let len = code.len() as f64;
    let mut acc = 0.0;
    for s in 0..n_samples {
        let phase = s as f64 / samples_per_chip;
        let a = code[(phase.rem_euclid(len)) as usize % code.len()];
        let b = code[((phase + offset_chips).rem_euclid(len)) as usize % code.len()];
        acc += (a * b) as f64;
    }
    acc / n_samples as f64
}

/// Zero crossing of the early-minus-late-amplitude discriminator for a
/// line-of-sight signal plus one in-phase specular ray, on the ideal triangle
/// ACF. `half_spacing`, `ray_delay` in chips; `alpha` is the relative ray
/// amplitude. Returns the lock offset of the replica relative to the
/// line-of-sight code phase, in chips (negative = replica lags).
pub fn multipath_lock_bias(half_spacing: f64, ray_delay: f64, alpha: f64) -> f64 {
    let disc = |e: f64| {
        // Replica phase error e (replica minus LOS); the ray sits at a lower
        // phase by ray_delay. Early tap leads the prompt.
        let early = triangle_acf(e + half_spacing) + alpha * triangle_acf(e + half_spacing + ray_delay);
        let late = triangle_acf(e - half_spacing) + alpha * triangle_acf(e - half_spacing + ray_delay);
        early.abs() - late.abs()
    };
    // Bisection on [-0.5, 0.5] chips.
    let mut lo = -0.5;
    let mut hi = 0.5;
    let mut flo = disc(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = disc(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Thermal-noise standard deviation of the noncoherent early-minus-late
/// amplitude DLL in chips, for early-late half-spacing `d2` (chips), loop
/// bandwidth `bn` (Hz), coherent time `t` (s), and linear C/N0 (Hz).
pub fn dll_thermal_sigma_chips(d2: f64, bn: f64, t: f64, cn0: f64) -> f64 {
    let d = 2.0 * d2;
    (bn * d / (2.0 * cn0) * (1.0 + 2.0 / ((2.0 - d) * t * cn0))).sqrt()
}

/// Textbook double-difference code+carrier Kalman filter used as the
/// independent check on the production float-RTK engine. State ordering,
/// update form (batch, Joseph), and bookkeeping are deliberately different.
pub struct ReferenceDdEkf {
    code_sigma: f64,
    carr_sigma_cycles: f64,
    q_pos: f64,
    p0_pos: f64,
    p0_amb: f64,
    /// [N_1..N_{m-1}, px, py, pz]
    x: Option<nalgebra::DVector<f64>>,
    cov: Option<nalgebra::DMatrix<f64>>,
    prns: Vec<u8>,
    master: u8,
    last_t: f64,
}

impl ReferenceDdEkf {
    pub fn new(code_sigma: f64, carr_sigma_cycles: f64, q_pos: f64, p0_pos: f64, p0_amb: f64) -> Self {
        Self {
            code_sigma,
            carr_sigma_cycles,
            q_pos,
            p0_pos,
            p0_amb,
            x: None,
            cov: None,
            prns: Vec::new(),
            master: 0,
            last_t: 0.0,
        }
    }

    /// One epoch; observations are (prn, pseudorange, carrier_cycles).
    /// Requires a constant satellite set across the run.
    pub fn step(
        &mut self,
        t: f64,
        rover: &[(u8, f64, f64)],
        base: &[(u8, f64, f64)],
        base_pos: &Vector3<f64>,
        sats: &[(u8, Vector3<f64>, f64)],
        init_pos: &Vector3<f64>,
    ) -> Vector3<f64> {
        use nalgebra::{DMatrix, DVector};
        let lambda = crate::constants::L1_WAVELENGTH_M;
        if self.x.is_none() {
            let mut by_el: Vec<(u8, f64)> = sats.iter().map(|s| (s.0, s.2)).collect();
            by_el.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
            self.master = by_el[0].0;
            self.prns = by_el[1..].iter().map(|s| s.0).collect();
            let n = self.prns.len() + 3;
            let mut x = DVector::zeros(n);
            let sd = |prn: u8, set: &[(u8, f64, f64)]| {
                let o = set.iter().find(|o| o.0 == prn).unwrap();
                (o.1, o.2)
            };
            let (mc_r, mp_r) = sd(self.master, rover);
            let (mc_b, mp_b) = sd(self.master, base);
            for (i, &prn) in self.prns.clone().iter().enumerate() {
                let (c_r, p_r) = sd(prn, rover);
                let (c_b, p_b) = sd(prn, base);
                let ddc = (c_r - c_b) - (mc_r - mc_b);
                let ddp = (p_r - p_b) - (mp_r - mp_b);
                x[i] = ddp - ddc / lambda;
            }
            x[self.prns.len()] = init_pos.x;
            x[self.prns.len() + 1] = init_pos.y;
            x[self.prns.len() + 2] = init_pos.z;
            let mut cov = DMatrix::zeros(n, n);
            for i in 0..self.prns.len() {
                cov[(i, i)] = self.p0_amb * self.p0_amb;
            }
            for i in self.prns.len()..n {
                cov[(i, i)] = self.p0_pos * self.p0_pos;
            }
            self.x = Some(x);
            self.cov = Some(cov);
            self.last_t = t;
        }
        let mut x = self.x.take().unwrap();
        let mut cov = self.cov.take().unwrap();
        let n_amb = self.prns.len();
        let n = n_amb + 3;
        let dt = (t - self.last_t).max(0.0);
        self.last_t = t;
        for i in n_amb..n {
            cov[(i, i)] += self.q_pos * dt;
        }

        // Batch measurement update: one code + one carrier row per PRN.
        let m = 2 * n_amb;
        let mut h = DMatrix::zeros(m, n);
        let mut z = DVector::zeros(m);
        let mut r = DMatrix::zeros(m, m);
        let sd = |prn: u8, set: &[(u8, f64, f64)]| {
            let o = set.iter().find(|o| o.0 == prn).unwrap();
            (o.1, o.2)
        };
        let sat = |prn: u8| sats.iter().find(|s| s.0 == prn).unwrap().1;
        let p_est = Vector3::new(x[n_amb], x[n_amb + 1], x[n_amb + 2]);
        let (mc_r, mp_r) = sd(self.master, rover);
        let (mc_b, mp_b) = sd(self.master, base);
        let s_m = sat(self.master);
        for (i, &prn) in self.prns.clone().iter().enumerate() {
            let s_i = sat(prn);
            let g = ((s_i - p_est).norm() - (s_i - base_pos).norm())
                - ((s_m - p_est).norm() - (s_m - base_pos).norm());
            let grad = (s_m - p_est).normalize() - (s_i - p_est).normalize();
            let (c_r, p_r) = sd(prn, rover);
            let (c_b, p_b) = sd(prn, base);
            let ddc = (c_r - c_b) - (mc_r - mc_b);
            let ddp = (p_r - p_b) - (mp_r - mp_b);
            // code row
            h[(2 * i, n_amb)] = grad.x;
            h[(2 * i, n_amb + 1)] = grad.y;
            h[(2 * i, n_amb + 2)] = grad.z;
            z[2 * i] = ddc - g;
            r[(2 * i, 2 * i)] = 4.0 * self.code_sigma * self.code_sigma;
            // carrier row (meters)
            h[(2 * i + 1, n_amb)] = grad.x;
            h[(2 * i + 1, n_amb + 1)] = grad.y;
            h[(2 * i + 1, n_amb + 2)] = grad.z;
            h[(2 * i + 1, i)] = lambda;
            z[2 * i + 1] = ddp * lambda - (g + lambda * x[i]);
            r[(2 * i + 1, 2 * i + 1)] = 4.0 * (self.carr_sigma_cycles * lambda).powi(2);
        }
        let s_inn = &h * &cov * h.transpose() + &r;
        let k = &cov * h.transpose() * s_inn.try_inverse().expect("reference EKF inversion");
        x += &k * z;
        let ikh = DMatrix::identity(n, n) - &k * &h;
        cov = &ikh * &cov * ikh.transpose() + &k * &r * k.transpose();
        let p_out = Vector3::new(x[n_amb], x[n_amb + 1], x[n_amb + 2]);
        self.x = Some(x);
        self.cov = Some(cov);
        p_out
    }
}
