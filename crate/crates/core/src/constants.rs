//! Physical constants (CODATA 2018) and 87Rb data.

use std::f64::consts::PI;

pub const C: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const H: f64 = 6.626_070_15e-34;
pub const KB: f64 = 1.380_649e-23;
pub const EPS0: f64 = 8.854_187_812_8e-12;
pub const E_CHARGE: f64 = 1.602_176_634e-19;
pub const A0: f64 = 5.291_772_109_03e-11;
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Bohr magneton, J/T.
pub const MU_B: f64 = 9.274_010_078_3e-24;

/// 87Rb atomic mass.
pub const RB87_MASS: f64 = 86.909_2 * AMU;
/// Nuclear spin of 87Rb, doubled.
pub const RB87_TWO_I: u32 = 3;

/// D2 natural linewidth Γ/2π in Hz.
pub const RB87_D2_LINEWIDTH_HZ: f64 = 6.065e6;
/// D2 vacuum wavelength.
pub const RB87_D2_LAMBDA: f64 = 780.246e-9;
/// D1 vacuum wavelength.
pub const RB87_D1_LAMBDA: f64 = 794.979e-9;
/// Ground hyperfine splitting in Hz.
pub const RB87_GROUND_HFS_HZ: f64 = 6.834_682_610_904e9;
/// F=1 and F=2 offsets from the 5S1/2 centroid, Hz.
pub const RB87_F1_OFFSET_HZ: f64 = -4.271_676_631_815e9;
pub const RB87_F2_OFFSET_HZ: f64 = 2.563_005_979_089e9;
/// 5P3/2 F'=3 to F'=2 spacing, Hz.
pub const RB87_EXCITED_32_SPLIT_HZ: f64 = 266.650e6;

/// Saturation intensities for isotropic light, W/m² (6.01, 10.01 and 3.58 mW/cm²).
pub const IS_12: f64 = 60.1;
pub const IS_22: f64 = 100.1;
pub const IS_23: f64 = 35.8;

/// Decay rate used in the four-level model, 2π·6 MHz.
pub const GAMMA_FOUR_LEVEL: f64 = 2.0 * PI * 6.0e6;

pub fn omega_from_lambda(lambda: f64) -> f64 {
    2.0 * PI * C / lambda
}

pub fn lambda_from_omega(omega: f64) -> f64 {
    2.0 * PI * C / omega
}

/// mW/cm² to W/m².
pub fn mw_per_cm2(x: f64) -> f64 {
    x * 10.0
}

/// Temperature in kelvin to energy in joule.
pub fn kelvin_to_joule(t: f64) -> f64 {
    KB * t
}
