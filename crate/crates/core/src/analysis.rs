//! Reduction of measured data: coincidence-histogram normalization, dark-count
//! correction, line-profile convolution and the Doppler-width fit.

use crate::constants::KB;
use crate::error::{ensure_nonneg, ensure_positive, invalid, Error, Result};
use crate::optimize::{brent_minimize, grid_argmin};

/// Start-stop coincidence histogram from the two detectors of an HBT setup.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    /// Width Δτ of a delay bin, s.
    pub bin_width: f64,
    pub counts: Vec<u64>,
    /// Single count rates of the two detectors, 1/s.
    pub r1: f64,
    pub r2: f64,
    /// Integration time, s.
    pub t_int: f64,
}

impl CoincidenceHistogram {
    pub fn new(bin_width: f64, counts: Vec<u64>, r1: f64, r2: f64, t_int: f64) -> Result<Self> {
        let h = Self { bin_width, counts, r1, r2, t_int };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("bin_width", self.bin_width)?;
        ensure_positive("r1", self.r1)?;
        ensure_positive("r2", self.r2)?;
        ensure_positive("t_int", self.t_int)
    }

    /// Expected coincidences per bin for uncorrelated light.
    pub fn accidental_level(&self) -> f64 {
        self.r1 * self.r2 * self.bin_width * self.t_int
    }
}

/// g² per bin: counts / (r₁ r₂ Δτ T_int).
pub fn normalize_g2(hist: &CoincidenceHistogram) -> Result<Vec<f64>> {
    hist.validate()?;
    let norm = hist.accidental_level();
    Ok(hist.counts.iter().map(|&c| c as f64 / norm).collect())
}

/// Fraction of the uncorrelated coincidence level that involves at least one dark count.
///
/// With signal rates s₁, s₂ and dark rate d on each detector the accidental
/// background under g² is 1 − s₁s₂/((s₁+d)(s₂+d)). For d ≪ s this is
/// d(1/s₁ + 1/s₂) to first order.
pub fn dark_count_floor(dark_rate: f64, signal_rates: (f64, f64)) -> Result<f64> {
    ensure_nonneg("dark_rate", dark_rate)?;
    ensure_positive("signal_rate_1", signal_rates.0)?;
    ensure_positive("signal_rate_2", signal_rates.1)?;
    let (s1, s2) = signal_rates;
    Ok(1.0 - s1 * s2 / ((s1 + dark_rate) * (s2 + dark_rate)))
}

/// Removes a flat accidental floor: (g_raw − floor)/(1 − floor).
pub fn correct_g2(raw: f64, floor: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&floor) {
        return Err(invalid("floor", format!("must lie in [0, 1), got {floor}")));
    }
    Ok((raw - floor) / (1.0 - floor))
}

/// Oscillation frequency (Hz) of a g² trace from the spacing of its successive maxima.
///
/// Maxima are located on the sampled trace and refined by a parabola through
/// the three neighbouring points. At most `max_peaks` maxima are used, counted
/// from the shortest delay; at least two are needed.
pub fn oscillation_frequency(tau: &[f64], g2: &[f64], max_peaks: usize) -> Result<f64> {
    if tau.len() != g2.len() || tau.len() < 5 {
        return Err(invalid("data", "need at least five (τ, g²) pairs of equal length"));
    }
    if tau.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("tau", "delays must be strictly increasing"));
    }
    let mut peaks = Vec::new();
    for i in 1..tau.len() - 1 {
        if g2[i] > g2[i - 1] && g2[i] >= g2[i + 1] {
            let (x0, x1, x2) = (tau[i - 1], tau[i], tau[i + 1]);
            let (y0, y1, y2) = (g2[i - 1], g2[i], g2[i + 1]);
            // vertex of the parabola through the three points
            let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
            let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
            let x = if den.abs() > 0.0 { x1 - 0.5 * num / den } else { x1 };
            peaks.push(x.clamp(x0, x2));
            if peaks.len() == max_peaks.max(2) {
                break;
            }
        }
    }
    if peaks.len() < 2 {
        return Err(Error::Numerical(format!("found {} maxima, need at least two", peaks.len())));
    }
    let period = (peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64;
    Ok(1.0 / period)
}

/// Sampled line profile: strictly increasing frequencies (Hz) and non-negative amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumProfile {
    freq: Vec<f64>,
    amp: Vec<f64>,
}

impl SpectrumProfile {
    pub fn new(freq: Vec<f64>, amp: Vec<f64>) -> Result<Self> {
        if freq.len() != amp.len() || freq.len() < 2 {
            return Err(invalid("profile", "need at least two points and matching lengths"));
        }
        if freq.iter().any(|f| !f.is_finite()) || freq.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("freq", "grid must be finite and strictly increasing"));
        }
        if amp.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(invalid("amp", "amplitudes must be finite and non-negative"));
        }
        Ok(Self { freq, amp })
    }

    pub fn gaussian(grid: &[f64], center: f64, fwhm: f64) -> Result<Self> {
        ensure_positive("fwhm", fwhm)?;
        let s = fwhm / (8.0 * 2f64.ln()).sqrt();
        Self::new(grid.to_vec(), grid.iter().map(|f| (-0.5 * ((f - center) / s).powi(2)).exp()).collect())
    }

    pub fn lorentzian(grid: &[f64], center: f64, fwhm: f64) -> Result<Self> {
        ensure_positive("fwhm", fwhm)?;
        let h = 0.5 * fwhm;
        Self::new(grid.to_vec(), grid.iter().map(|f| h * h / ((f - center).powi(2) + h * h)).collect())
    }

    pub fn freq(&self) -> &[f64] {
        &self.freq
    }

    pub fn amp(&self) -> &[f64] {
        &self.amp
    }

    pub fn len(&self) -> usize {
        self.freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq.is_empty()
    }

    pub fn peak(&self) -> f64 {
        self.amp.iter().copied().fold(0.0, f64::max)
    }

    /// Trapezoidal area.
    pub fn area(&self) -> f64 {
        self.freq.windows(2).zip(self.amp.windows(2)).map(|(f, a)| 0.5 * (f[1] - f[0]) * (a[0] + a[1])).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let p = self.peak();
        if !(p > 0.0) {
            return Err(Error::Numerical("profile has zero peak".into()));
        }
        Ok(Self { freq: self.freq.clone(), amp: self.amp.iter().map(|a| a / p).collect() })
    }

    /// Linear interpolation, zero outside the grid.
    pub fn value_at(&self, f: f64) -> f64 {
        let n = self.freq.len();
        if f < self.freq[0] || f > self.freq[n - 1] {
            return 0.0;
        }
        let i = self.freq.partition_point(|&x| x <= f).clamp(1, n - 1);
        let (f0, f1) = (self.freq[i - 1], self.freq[i]);
        let t = (f - f0) / (f1 - f0);
        self.amp[i - 1] * (1.0 - t) + self.amp[i] * t
    }

    /// Full width at half maximum from linearly interpolated half-power crossings.
    pub fn fwhm(&self) -> Result<f64> {
        let (imax, &pk) = self
            .amp
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("profile has points");
        if !(pk > 0.0) {
            return Err(Error::Numerical("profile has zero peak".into()));
        }
        let half = 0.5 * pk;
        let cross = |i: usize, j: usize| {
            let t = (half - self.amp[i]) / (self.amp[j] - self.amp[i]);
            self.freq[i] + t * (self.freq[j] - self.freq[i])
        };
        let left = (0..imax).rev().find(|&i| self.amp[i] < half).map(|i| cross(i, i + 1));
        let right = (imax + 1..self.len()).find(|&i| self.amp[i] < half).map(|i| cross(i - 1, i));
        match (left, right) {
            (Some(l), Some(r)) => Ok(r - l),
            _ => Err(Error::Numerical("profile does not fall below half maximum on both sides".into())),
        }
    }

    fn mean_step(&self) -> f64 {
        (self.freq[self.len() - 1] - self.freq[0]) / (self.len() - 1) as f64
    }

    fn min_step(&self) -> f64 {
        self.freq.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    fn resample(&self, start: f64, step: f64) -> Vec<f64> {
        let n = ((self.freq[self.len() - 1] - start) / step).floor() as usize + 1;
        (0..n).map(|k| self.value_at(start + k as f64 * step)).collect()
    }
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn convolve_full(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Convolution integral (a ⊛ b)(f) = ∫ a(f′) b(f − f′) df′ without renormalization.
///
/// Both profiles are resampled onto a common step (the finer of the two
/// grids); the sum of the result times the step equals the product of the
/// resampled areas.
pub fn convolve_profiles_raw(a: &SpectrumProfile, b: &SpectrumProfile) -> Result<SpectrumProfile> {
    let step = a.min_step().min(b.min_step());
    let ra = a.resample(a.freq[0], step);
    let rb = b.resample(b.freq[0], step);
    let c = convolve_full(&ra, &rb);
    let f0 = a.freq[0] + b.freq[0];
    let freq = (0..c.len()).map(|k| f0 + k as f64 * step).collect();
    SpectrumProfile::new(freq, c.into_iter().map(|v| (v * step).max(0.0)).collect())
}

/// Discrete linear convolution on a common uniform grid, renormalized to unit peak.
pub fn convolve_profiles(a: &SpectrumProfile, b: &SpectrumProfile) -> Result<SpectrumProfile> {
    convolve_profiles_raw(a, b)?.normalized()
}

/// Result of the Doppler-width fit.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerFit {
    /// Standard deviation of the Doppler Gaussian, Hz.
    pub sigma_nu: f64,
    /// One-sigma statistical error of `sigma_nu` from the residual scatter, Hz.
    pub stderr: f64,
    /// Scale factor between the unit-peak model and the data.
    pub amplitude: f64,
    /// Data minus model on the fluorescence grid.
    pub residuals: Vec<f64>,
    pub residual_norm: f64,
}

/// Reference profile on a uniform grid, ready to be broadened by Gaussian kernels.
struct BroadeningModel {
    start: f64,
    step: f64,
    reference: Vec<f64>,
}

impl BroadeningModel {
    fn new(reference: &SpectrumProfile) -> Self {
        let step = reference.mean_step().min(reference.min_step() * 2.0);
        let start = reference.freq[0];
        Self { start, step, reference: reference.resample(start, step) }
    }

    /// Reference convolved with a unit-sum Gaussian of width σ, unit peak, same grid.
    fn broadened(&self, sigma: f64) -> Vec<f64> {
        let r = &self.reference;
        let out = if sigma < 1e-3 * self.step {
            r.clone()
        } else {
            let half = ((6.0 * sigma / self.step).ceil() as usize).min(4 * r.len());
            let mut k: Vec<f64> =
                (0..=2 * half).map(|i| (-0.5 * ((i as f64 - half as f64) * self.step / sigma).powi(2)).exp()).collect();
            let s: f64 = k.iter().sum();
            k.iter_mut().for_each(|v| *v /= s);
            let full = convolve_full(r, &k);
            full[half..half + r.len()].to_vec()
        };
        let pk = out.iter().copied().fold(0.0, f64::max);
        if pk > 0.0 {
            out.into_iter().map(|v| v / pk).collect()
        } else {
            out
        }
    }

    fn at(&self, model: &[f64], f: f64) -> f64 {
        let x = (f - self.start) / self.step;
        if x < 0.0 || x > (model.len() - 1) as f64 {
            return 0.0;
        }
        let i = (x.floor() as usize).min(model.len() - 2);
        let t = x - i as f64;
        model[i] * (1.0 - t) + model[i + 1] * t
    }

    fn on(&self, sigma: f64, grid: &[f64]) -> Vec<f64> {
        let m = self.broadened(sigma);
        grid.iter().map(|&f| self.at(&m, f)).collect()
    }
}

/// Least-squares amplitude and sum of squared residuals for a fixed model shape.
fn scaled_ssr(model: &[f64], data: &[f64]) -> (f64, f64) {
    let num: f64 = model.iter().zip(data).map(|(m, d)| m * d).sum();
    let den: f64 = model.iter().map(|m| m * m).sum();
    let a = if den > 0.0 { num / den } else { 0.0 };
    let ssr = model.iter().zip(data).map(|(m, d)| (d - a * m).powi(2)).sum();
    (a, ssr)
}

/// Fits fluorescence ≈ A · (reference ⊛ Gaussian(σ_ν)) with σ_ν the only shape parameter.
///
/// The Gaussian kernel has unit sum so the convolution keeps the reference
/// area; the broadened profile is scaled to unit peak and its overall height
/// A is solved in closed form for each trial σ_ν. σ_ν is located on a coarse
/// grid and refined with Brent's method.
pub fn fit_doppler_sigma(reference: &SpectrumProfile, fluorescence: &SpectrumProfile) -> Result<DopplerFit> {
    let (rlo, rhi) = (reference.freq[0], reference.freq[reference.len() - 1]);
    let (flo, fhi) = (fluorescence.freq[0], fluorescence.freq[fluorescence.len() - 1]);
    if fhi <= rlo || flo >= rhi {
        return Err(invalid("fluorescence", "frequency grid does not overlap the reference"));
    }
    if !(reference.peak() > 0.0) || !(fluorescence.peak() > 0.0) {
        return Err(invalid("profile", "both profiles need a positive peak"));
    }
    let model = BroadeningModel::new(reference);
    let grid = &fluorescence.freq;
    let data = &fluorescence.amp;
    let cost = |s: f64| scaled_ssr(&model.on(s.max(0.0), grid), data).1;

    let sigma_max = 0.25 * (rhi - rlo);
    let n = 120;
    let (i, _) = grid_argmin(&cost, 0.0, sigma_max, n);
    let h = sigma_max / n as f64;
    let a0 = (h * (i as f64 - 1.0)).max(0.0);
    let b0 = (h * (i as f64 + 1.0)).min(sigma_max);
    let (mut sigma, mut ssr) = brent_minimize(cost, a0, b0, 1e-10, 200);
    let c0 = cost(0.0);
    if c0 <= ssr {
        sigma = 0.0;
        ssr = c0;
    }
    let shape = model.on(sigma, grid);
    let (amp, _) = scaled_ssr(&shape, data);
    let residuals: Vec<f64> = data.iter().zip(&shape).map(|(d, m)| d - amp * m).collect();
    let residual_norm = ssr.sqrt();
    if sigma >= sigma_max * (1.0 - 1e-6) || !residual_norm.is_finite() {
        return Err(Error::Numerical(format!(
            "Doppler fit did not converge inside [0, {sigma_max:e}] Hz; residual norm {residual_norm:e}"
        )));
    }

    // Central-difference Jacobian in σ, projected orthogonal to the model shape so the
    // error accounts for the amplitude solved alongside.
    let d = (1e-3 * sigma).max(0.05 * model.step);
    let lo = (sigma - d).max(0.0);
    let hi = sigma + d;
    let m_hi = model.on(hi, grid);
    let m_lo = model.on(lo, grid);
    let jac: Vec<f64> = m_hi.iter().zip(&m_lo).map(|(a, b)| amp * (a - b) / (hi - lo)).collect();
    let mm: f64 = shape.iter().map(|m| m * m).sum();
    let jm: f64 = jac.iter().zip(&shape).map(|(j, m)| j * m).sum();
    let jtj: f64 = jac.iter().map(|j| j * j).sum::<f64>() - if mm > 0.0 { jm * jm / mm } else { 0.0 };
    let dof = fluorescence.len().saturating_sub(2).max(1) as f64;
    let stderr = if jtj > 0.0 { (ssr / dof / jtj).sqrt() } else { f64::INFINITY };
    Ok(DopplerFit { sigma_nu: sigma, stderr, amplitude: amp, residuals, residual_norm })
}

/// Mean kinetic energy over k_B (K) for a Doppler width σ_ν seen along one axis.
///
/// v_rms along the axis is λσ_ν; an isotropic distribution gives
/// ⟨Δv²⟩ = 3(λσ_ν)² and E_kin = ½m⟨Δv²⟩.
pub fn kinetic_energy_from_sigma(sigma_nu: f64, wavelength: f64, mass: f64) -> Result<f64> {
    ensure_nonneg("sigma_nu", sigma_nu)?;
    ensure_positive("wavelength", wavelength)?;
    ensure_positive("mass", mass)?;
    Ok(1.5 * mass * (wavelength * sigma_nu).powi(2) / KB)
}

/// Inverse of [`kinetic_energy_from_sigma`].
pub fn sigma_from_kinetic_energy(e_kin: f64, wavelength: f64, mass: f64) -> Result<f64> {
    ensure_nonneg("e_kin", e_kin)?;
    ensure_positive("wavelength", wavelength)?;
    ensure_positive("mass", mass)?;
    Ok((2.0 * KB * e_kin / (3.0 * mass)).sqrt() / wavelength)
}
