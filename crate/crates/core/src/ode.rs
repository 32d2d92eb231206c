//! Explicit Runge-Kutta integrators shared by all dynamical models.
//!
//! States are flat `f64` slices; complex quantities are stored as interleaved
//! real and imaginary parts by the callers.

use crate::error::{Error, Result};

/// Tolerances and step limits for [`dopri5`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-12, h0: None, h_max: f64::INFINITY, max_steps: 5_000_000 }
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0` and returns the state at every time in `t_out`.
///
/// `t_out` must be non-decreasing and not earlier than `t0`.
pub fn dopri5<F>(mut f: F, t0: f64, y0: &[f64], t_out: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    check_grid(t0, t_out)?;
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    f(t, &y, &mut k[0]);

    let span = t_out.last().map_or(0.0, |&te| te - t0);
    let mut h = opts.h0.unwrap_or_else(|| initial_step(&y, &k[0], span, opts));
    let mut out = Vec::with_capacity(t_out.len());
    let mut steps = 0usize;

    for &target in t_out {
        while t < target {
            if steps >= opts.max_steps {
                return Err(Error::Integration { t, reason: "step budget exhausted".into() });
            }
            steps += 1;
            let remaining = target - t;
            let last = h >= remaining;
            let hs = if last { remaining } else { h.min(opts.h_max) };

            stage(&y, hs, &[(A21, 0)], &k, &mut tmp);
            f(t + C2 * hs, &tmp, &mut k[1]);
            stage(&y, hs, &[(A31, 0), (A32, 1)], &k, &mut tmp);
            f(t + C3 * hs, &tmp, &mut k[2]);
            stage(&y, hs, &[(A41, 0), (A42, 1), (A43, 2)], &k, &mut tmp);
            f(t + C4 * hs, &tmp, &mut k[3]);
            stage(&y, hs, &[(A51, 0), (A52, 1), (A53, 2), (A54, 3)], &k, &mut tmp);
            f(t + C5 * hs, &tmp, &mut k[4]);
            stage(&y, hs, &[(A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4)], &k, &mut tmp);
            f(t + hs, &tmp, &mut k[5]);
            stage(&y, hs, &[(B1, 0), (B3, 2), (B4, 3), (B5, 4), (B6, 5)], &k, &mut y_new);
            f(t + hs, &y_new, &mut k[6]);

            let mut err = 0.0;
            for i in 0..n {
                let e = hs
                    * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
                let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = if n > 0 { (err / n as f64).sqrt() } else { 0.0 };
            if !err.is_finite() {
                return Err(Error::Integration { t, reason: "non-finite error estimate".into() });
            }

            if err <= 1.0 {
                t = if last { target } else { t + hs };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // A step shortened to land on an output time says nothing about the natural step.
                if !last || hs >= h {
                    h = hs * fac;
                }
            } else {
                h = hs * (0.9 * err.powf(-0.2)).max(0.1);
            }
            if h < 1e-14 * t.abs().max(span).max(f64::MIN_POSITIVE) {
                return Err(Error::Integration { t, reason: format!("step size underflow (h = {h:e})") });
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Classical fixed-step RK4; each output interval is split into steps no longer than `h`.
pub fn rk4<F>(mut f: F, t0: f64, y0: &[f64], t_out: &[f64], h: f64) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    check_grid(t0, t_out)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Integration { t: t0, reason: format!("invalid step {h}") });
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut out = Vec::with_capacity(t_out.len());
    for &target in t_out {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / h).ceil().max(1.0) as usize;
            let hs = span / steps as f64;
            for _ in 0..steps {
                f(t, &y, &mut k1);
                axpy(&y, 0.5 * hs, &k1, &mut tmp);
                f(t + 0.5 * hs, &tmp, &mut k2);
                axpy(&y, 0.5 * hs, &k2, &mut tmp);
                f(t + 0.5 * hs, &tmp, &mut k3);
                axpy(&y, hs, &k3, &mut tmp);
                f(t + hs, &tmp, &mut k4);
                for i in 0..n {
                    y[i] += hs / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                t += hs;
            }
            t = target;
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn check_grid(t0: f64, t_out: &[f64]) -> Result<()> {
    let mut prev = t0;
    for &t in t_out {
        if !t.is_finite() || t < prev {
            return Err(Error::Integration { t, reason: "output times must be finite and non-decreasing from t0".into() });
        }
        prev = t;
    }
    Ok(())
}

fn stage(y: &[f64], h: f64, coeffs: &[(f64, usize)], k: &[Vec<f64>; 7], out: &mut [f64]) {
    out.copy_from_slice(y);
    for &(a, j) in coeffs {
        let ha = h * a;
        for (o, kj) in out.iter_mut().zip(&k[j]) {
            *o += ha * kj;
        }
    }
}

fn axpy(y: &[f64], a: f64, x: &[f64], out: &mut [f64]) {
    for i in 0..y.len() {
        out[i] = y[i] + a * x[i];
    }
}

fn initial_step(y: &[f64], dy: &[f64], span: f64, opts: &OdeOptions) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (yi, fi) in y.iter().zip(dy) {
        let sc = opts.atol + opts.rtol * yi.abs();
        d0 += (yi / sc).powi(2);
        d1 += (fi / sc).powi(2);
    }
    let h = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 * span.max(1e-30) } else { 0.01 * (d0 / d1).sqrt() };
    let h = if span > 0.0 { h.min(span) } else { h };
    h.min(opts.h_max).max(f64::MIN_POSITIVE)
}
