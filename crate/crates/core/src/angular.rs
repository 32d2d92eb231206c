//! Clebsch-Gordan coefficients, Wigner 6j symbols and dipole matrix elements.
//!
//! Angular momenta and projections are carried as doubled integers, so `j = 3/2`
//! is `AngMom::new(3)` and `m = -1/2` is `-1`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::constants::{C, EPS0, HBAR};
use crate::error::{ensure_positive, invalid, Error, Result};

/// Largest factorial argument kept in the cache.
const MAX_FACTORIAL: usize = 200;

/// Largest doubled angular momentum accepted.
pub const MAX_TWO_J: u32 = 60;

/// Angular momentum quantum number stored as `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngMom {
    pub two_j: u32,
}

impl AngMom {
    pub const fn new(two_j: u32) -> Self {
        Self { two_j }
    }

    /// Integer angular momentum `j`.
    pub const fn int(j: u32) -> Self {
        Self { two_j: 2 * j }
    }

    pub fn value(self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// Multiplicity `2j + 1`.
    pub fn multiplicity(self) -> u32 {
        self.two_j + 1
    }

    /// Allowed doubled projections `-2j, -2j+2, ..., 2j`.
    pub fn projections(self) -> impl Iterator<Item = i32> {
        let tj = self.two_j as i32;
        (0..=self.two_j as i32).map(move |k| -tj + 2 * k)
    }

    fn check(self, name: &'static str) -> Result<()> {
        if self.two_j > MAX_TWO_J {
            return Err(invalid(name, format!("2j = {} exceeds {}", self.two_j, MAX_TWO_J)));
        }
        Ok(())
    }
}

impl std::fmt::Display for AngMom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.two_j % 2 == 0 {
            write!(f, "{}", self.two_j / 2)
        } else {
            write!(f, "{}/2", self.two_j)
        }
    }
}

/// Laser polarization: -1 (σ⁻), 0 (π), +1 (σ⁺).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct Polarization(i32);

impl Polarization {
    pub const SIGMA_MINUS: Self = Self(-1);
    pub const PI: Self = Self(0);
    pub const SIGMA_PLUS: Self = Self(1);

    pub fn new(epsilon: i32) -> Result<Self> {
        if epsilon.abs() <= 1 {
            Ok(Self(epsilon))
        } else {
            Err(invalid("epsilon", format!("polarization must be -1, 0 or +1, got {epsilon}")))
        }
    }

    pub fn epsilon(self) -> i32 {
        self.0
    }
}

impl TryFrom<i32> for Polarization {
    type Error = Error;
    fn try_from(v: i32) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Polarization> for i32 {
    fn from(p: Polarization) -> i32 {
        p.0
    }
}

/// Fully reduced dipole matrix element of a fine-structure transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedME {
    /// |⟨J||er||J'⟩| in C·m.
    pub value: f64,
    pub j_lower: AngMom,
    pub j_upper: AngMom,
    pub lifetime: f64,
    pub omega_if: f64,
}

fn factorials() -> &'static [BigInt] {
    static TABLE: OnceLock<Vec<BigInt>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut v = Vec::with_capacity(MAX_FACTORIAL + 1);
        let mut acc = BigInt::one();
        v.push(acc.clone());
        for n in 1..=MAX_FACTORIAL {
            acc *= n;
            v.push(acc.clone());
        }
        v
    })
}

fn fact(n: i64) -> &'static BigInt {
    debug_assert!(n >= 0 && (n as usize) <= MAX_FACTORIAL);
    &factorials()[n as usize]
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// `sign(s) * sqrt(p * s^2)`, with the product formed exactly.
fn signed_sqrt(p: &BigRational, s: &BigRational) -> f64 {
    if s.is_zero() {
        return 0.0;
    }
    let mag = (p * s * s).to_f64().unwrap_or(f64::NAN).sqrt();
    if s.is_negative() {
        -mag
    } else {
        mag
    }
}

/// Doubled quantities forming a triad must sum to an even number and obey the triangle rule.
fn triad_ok(a: u32, b: u32, c: u32) -> bool {
    (a + b + c) % 2 == 0 && c <= a + b && a <= b + c && b <= a + c
}

/// Triangle coefficient Δ(abc) squared, from doubled arguments.
fn delta_sq(a: i64, b: i64, c: i64) -> BigRational {
    ratio(
        fact((a + b - c) / 2) * fact((a - b + c) / 2) * fact((-a + b + c) / 2),
        fact((a + b + c) / 2 + 1).clone(),
    )
}

fn check_projection(name: &'static str, j: AngMom, two_m: i32) -> Result<()> {
    j.check(name)?;
    if two_m.unsigned_abs() > j.two_j || (j.two_j as i32 - two_m) % 2 != 0 {
        return Err(invalid(name, format!("projection 2m = {two_m} is not valid for 2j = {}", j.two_j)));
    }
    Ok(())
}

/// Clebsch-Gordan coefficient ⟨j1 m1; j2 m2 | J M⟩ in the Condon-Shortley convention.
///
/// All projections are doubled.
pub fn clebsch_gordan(j1: AngMom, m1: i32, j2: AngMom, m2: i32, jj: AngMom, mm: i32) -> Result<f64> {
    check_projection("m1", j1, m1)?;
    check_projection("m2", j2, m2)?;
    check_projection("M", jj, mm)?;
    if m1 + m2 != mm || !triad_ok(j1.two_j, j2.two_j, jj.two_j) {
        return Ok(0.0);
    }
    let (tj1, tj2, tj) = (j1.two_j as i64, j2.two_j as i64, jj.two_j as i64);
    let (tm1, tm2, tm) = (m1 as i64, m2 as i64, mm as i64);

    let pre = delta_sq(tj1, tj2, tj)
        * BigRational::from_integer(BigInt::from(tj + 1))
        * BigRational::from_integer(
            fact((tj + tm) / 2)
                * fact((tj - tm) / 2)
                * fact((tj1 - tm1) / 2)
                * fact((tj1 + tm1) / 2)
                * fact((tj2 - tm2) / 2)
                * fact((tj2 + tm2) / 2),
        );

    // k runs over all values that keep every factorial argument non-negative.
    let a = (tj1 + tj2 - tj) / 2;
    let b = (tj1 - tm1) / 2;
    let c = (tj2 + tm2) / 2;
    let d = (tj - tj2 + tm1) / 2;
    let e = (tj - tj1 - tm2) / 2;
    let k_min = 0.max(-d).max(-e);
    let k_max = a.min(b).min(c);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = fact(k) * fact(a - k) * fact(b - k) * fact(c - k) * fact(d + k) * fact(e + k);
        let term = ratio(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(signed_sqrt(&pre, &sum))
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6}.
pub fn wigner_6j(j1: AngMom, j2: AngMom, j3: AngMom, j4: AngMom, j5: AngMom, j6: AngMom) -> Result<f64> {
    for (name, j) in [("j1", j1), ("j2", j2), ("j3", j3), ("j4", j4), ("j5", j5), ("j6", j6)] {
        j.check(name)?;
    }
    let [a, b, c, d, e, f] = [j1, j2, j3, j4, j5, j6].map(|j| j.two_j);
    if !(triad_ok(a, b, c) && triad_ok(a, e, f) && triad_ok(d, b, f) && triad_ok(d, e, c)) {
        return Ok(0.0);
    }
    let [a, b, c, d, e, f] = [a, b, c, d, e, f].map(|x| x as i64);
    let pre = delta_sq(a, b, c) * delta_sq(a, e, f) * delta_sq(d, b, f) * delta_sq(d, e, c);

    let alphas = [(a + b + c) / 2, (a + e + f) / 2, (d + b + f) / 2, (d + e + c) / 2];
    let betas = [(a + b + d + e) / 2, (b + c + e + f) / 2, (c + a + f + d) / 2];
    let t_min = *alphas.iter().max().unwrap();
    let t_max = *betas.iter().min().unwrap();
    let mut sum = BigRational::zero();
    for t in t_min..=t_max {
        let mut den = BigInt::one();
        for al in alphas {
            den *= fact(t - al);
        }
        for be in betas {
            den *= fact(be - t);
        }
        let term = ratio(fact(t + 1).clone(), den);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(signed_sqrt(&pre, &sum))
}

/// Reduced dipole matrix element ⟨J||er||J'⟩ from the lifetime of the J' -> J decay.
///
/// `j` is the lower level and `j_prime` the upper one.
pub fn reduced_me_from_lifetime(lifetime: f64, omega_if: f64, j: AngMom, j_prime: AngMom) -> Result<ReducedME> {
    ensure_positive("lifetime", lifetime)?;
    ensure_positive("omega_if", omega_if)?;
    let value = (3.0 * std::f64::consts::PI * EPS0 * HBAR * C.powi(3) / omega_if.powi(3)
        * (j_prime.multiplicity() as f64 / j.multiplicity() as f64)
        / lifetime)
        .sqrt();
    Ok(ReducedME { value, j_lower: j, j_upper: j_prime, lifetime, omega_if })
}

/// Angular amplitude of dipole emission along polar angle `theta` for a Δm transition.
pub fn emission_amplitude(delta_m: i32, theta: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(invalid("theta", format!("must lie in [0, π], got {theta}")));
    }
    match delta_m {
        0 => Ok(theta.sin()),
        -1 | 1 => Ok(((1.0 + theta.cos().powi(2)) / 2.0).sqrt()),
        _ => Err(invalid("delta_m", format!("must be -1, 0 or +1, got {delta_m}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALF: AngMom = AngMom::new(1);
    const ONE: AngMom = AngMom::new(2);

    #[test]
    fn cg_singlet_component() {
        let v = clebsch_gordan(HALF, 1, HALF, -1, AngMom::new(0), 0).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cg_selection_rule() {
        assert_eq!(clebsch_gordan(ONE, 2, ONE, 2, ONE, 2).unwrap(), 0.0);
    }

    #[test]
    fn cg_one_one_two() {
        let v = clebsch_gordan(ONE, 0, ONE, 0, AngMom::int(2), 0).unwrap();
        assert!((v - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cg_rejects_bad_projection() {
        assert!(clebsch_gordan(HALF, 0, HALF, 1, ONE, 1).is_err());
        assert!(clebsch_gordan(HALF, 3, HALF, -1, ONE, 2).is_err());
    }

    #[test]
    fn six_j_values() {
        let v = wigner_6j(HALF, HALF, ONE, HALF, HALF, ONE).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
        let z = AngMom::new(0);
        let w = wigner_6j(z, ONE, ONE, z, ONE, ONE).unwrap();
        assert!((w - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(wigner_6j(ONE, ONE, AngMom::int(3), ONE, ONE, ONE).unwrap(), 0.0);
    }

    #[test]
    fn six_j_rejects_huge() {
        assert!(wigner_6j(AngMom::new(100), ONE, ONE, ONE, ONE, ONE).is_err());
    }

    #[test]
    fn d2_matrix_element() {
        let w = crate::constants::omega_from_lambda(780.246e-9);
        let me = reduced_me_from_lifetime(26.24e-9, w, HALF, AngMom::new(3)).unwrap();
        assert!((me.value / 3.584e-29 - 1.0).abs() < 1e-3, "{}", me.value);
        let me2 = reduced_me_from_lifetime(2.0 * 26.24e-9, w, HALF, AngMom::new(3)).unwrap();
        assert!((me2.value / me.value - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn d1_matrix_element_regression() {
        let w = crate::constants::omega_from_lambda(794.979e-9);
        let me = reduced_me_from_lifetime(27.70e-9, w, HALF, HALF).unwrap();
        assert!((me.value / 2.536_716e-29 - 1.0).abs() < 1e-6, "{}", me.value);
    }

    #[test]
    fn lifetime_rejects_nonpositive() {
        assert!(reduced_me_from_lifetime(0.0, 1.0, HALF, HALF).is_err());
        assert!(reduced_me_from_lifetime(1.0, -1.0, HALF, HALF).is_err());
    }

    #[test]
    fn emission_pattern() {
        use std::f64::consts::FRAC_PI_2;
        assert_eq!(emission_amplitude(0, 0.0).unwrap(), 0.0);
        assert!((emission_amplitude(1, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((emission_amplitude(1, FRAC_PI_2).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(emission_amplitude(2, 0.0).is_err());
        assert!(emission_amplitude(0, 4.0).is_err());
    }
}
