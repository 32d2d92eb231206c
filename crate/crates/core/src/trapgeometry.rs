//! Focused-beam trap geometry, harmonic frequencies and characteristic temperatures.

use std::f64::consts::PI;

use crate::constants::{HBAR, KB};
use crate::error::{ensure_nonneg, ensure_positive, invalid, Result};
use crate::lightshift::{ground_shift_alkali, LaserField, LineTable};

/// A focused TEM00 beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBeam {
    pub power: f64,
    pub waist_w0: f64,
    pub wavelength: f64,
}

impl GaussianBeam {
    pub fn new(power: f64, waist_w0: f64, wavelength: f64) -> Result<Self> {
        ensure_nonneg("power", power)?;
        ensure_positive("waist_w0", waist_w0)?;
        ensure_positive("wavelength", wavelength)?;
        Ok(Self { power, waist_w0, wavelength })
    }

    pub fn rayleigh(&self) -> f64 {
        PI * self.waist_w0 * self.waist_w0 / self.wavelength
    }

    /// 1/e² radius at axial position `z`.
    pub fn radius(&self, z: f64) -> f64 {
        self.waist_w0 * (1.0 + (z / self.rayleigh()).powi(2)).sqrt()
    }

    pub fn peak_intensity(&self) -> f64 {
        2.0 * self.power / (PI * self.waist_w0 * self.waist_w0)
    }

    /// Linearly polarized field at the focus.
    pub fn focus_field(&self) -> Result<LaserField> {
        LaserField::linear(self.wavelength, self.peak_intensity())
    }
}

/// Intensity of a Gaussian beam at radius `r` and axial offset `z`, W/m².
pub fn intensity(beam: &GaussianBeam, r: f64, z: f64) -> f64 {
    let w = beam.radius(z);
    2.0 * beam.power / (PI * w * w) * (-2.0 * r * r / (w * w)).exp()
}

/// Harmonic description of a trap: depth magnitude Û, waist, Rayleigh length and atom mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSpec {
    pub depth_u: f64,
    pub waist_w0: f64,
    pub z_r: f64,
    pub atom_mass: f64,
}

impl TrapSpec {
    pub fn new(depth_u: f64, waist_w0: f64, wavelength: f64, atom_mass: f64) -> Result<Self> {
        ensure_positive("depth_u", depth_u)?;
        ensure_positive("waist_w0", waist_w0)?;
        ensure_positive("wavelength", wavelength)?;
        ensure_positive("atom_mass", atom_mass)?;
        Ok(Self { depth_u, waist_w0, z_r: PI * waist_w0 * waist_w0 / wavelength, atom_mass })
    }

    /// Trap formed by `beam`, with the depth from the ground-state alkali potential.
    pub fn from_beam(beam: &GaussianBeam, lines: &LineTable, atom_mass: f64) -> Result<Self> {
        let u = ground_shift_alkali(&beam.focus_field()?, 1, lines)?;
        if u >= 0.0 {
            return Err(invalid("wavelength", "blue-detuned beam does not trap at the focus"));
        }
        Self::new(-u, beam.waist_w0, beam.wavelength, atom_mass)
    }

    /// Potential of the full Gaussian shape, J.
    pub fn potential(&self, r: f64, z: f64) -> f64 {
        let s = 1.0 + (z / self.z_r).powi(2);
        -self.depth_u / s * (-2.0 * r * r / (self.waist_w0 * self.waist_w0 * s)).exp()
    }

    /// Harmonic approximation of [`TrapSpec::potential`].
    pub fn potential_harmonic(&self, r: f64, z: f64) -> f64 {
        -self.depth_u * (1.0 - 2.0 * (r / self.waist_w0).powi(2) - (z / self.z_r).powi(2))
    }
}

/// Radial and axial angular trap frequencies (rad/s).
pub fn harmonic_frequencies(trap: &TrapSpec) -> (f64, f64) {
    let m = trap.atom_mass;
    let omega_r = (4.0 * trap.depth_u / (m * trap.waist_w0 * trap.waist_w0)).sqrt();
    let omega_z = (2.0 * trap.depth_u / (m * trap.z_r * trap.z_r)).sqrt();
    (omega_r, omega_z)
}

/// Doppler temperature ħΓ/(2k_B).
pub fn doppler_temperature(gamma: f64) -> Result<f64> {
    ensure_nonneg("gamma", gamma)?;
    Ok(HBAR * gamma / (2.0 * KB))
}

/// Recoil temperature ħ²k²/(m k_B).
pub fn recoil_temperature(wavelength: f64, mass: f64) -> Result<f64> {
    ensure_positive("wavelength", wavelength)?;
    ensure_positive("mass", mass)?;
    let k = 2.0 * PI / wavelength;
    Ok(HBAR * HBAR * k * k / (mass * KB))
}

/// Recoil heating rate in K/s; `kappa` is the potential-to-kinetic energy ratio.
pub fn heating_rate(t_rec: f64, gamma_sc: f64, kappa: f64) -> Result<f64> {
    ensure_nonneg("t_rec", t_rec)?;
    ensure_nonneg("gamma_sc", gamma_sc)?;
    if kappa.is_nan() || kappa < 0.0 {
        return Err(invalid("kappa", format!("must be non-negative, got {kappa}")));
    }
    Ok(2.0 / 3.0 / (1.0 + kappa) * t_rec * gamma_sc)
}

/// Effective cylindrical volume occupied by atoms at temperature `t`, m³.
pub fn trap_volume(trap: &TrapSpec, t: f64) -> Result<f64> {
    ensure_nonneg("temperature", t)?;
    let eta = KB * t / trap.depth_u;
    if eta >= 1.0 {
        return Err(invalid("temperature", format!("k_B T / U = {eta:.4} >= 1: atoms are not trapped")));
    }
    if eta == 0.0 {
        return Ok(0.0);
    }
    Ok(PI * trap.waist_w0 * trap.waist_w0 * trap.z_r * (1.0 / (1.0 - eta)).ln() * (eta / (1.0 - eta)).sqrt())
}
