//! Fixtures shared by the criterion benches.

use atomtrap::analysis::{convolve_profiles, uniform_grid, SpectrumProfile};

/// Reference line and its Doppler-broadened copy on a common grid (MHz).
pub fn doppler_pair(points: usize, sigma_mhz: f64) -> (SpectrumProfile, SpectrumProfile) {
    let grid = uniform_grid(-6.0, 6.0, points);
    let reference = SpectrumProfile::lorentzian(&grid, 0.0, 0.45).expect("valid grid");
    let fwhm = sigma_mhz * (8.0 * 2f64.ln()).sqrt();
    let kernel = SpectrumProfile::gaussian(&grid, 0.0, fwhm).expect("valid grid");
    let broadened = convolve_profiles(&reference, &kernel).expect("overlapping grids");
    (reference, broadened)
}

/// Delay grid `0..=max_ns` in seconds.
pub fn tau_grid(max_ns: f64, step_ns: f64) -> Vec<f64> {
    let n = (max_ns / step_ns).round() as usize;
    (0..=n).map(|k| k as f64 * step_ns * 1e-9).collect()
}
