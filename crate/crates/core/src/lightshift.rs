//! AC-Stark shifts, dipole potentials and photon scattering rates.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::angular::{clebsch_gordan, wigner_6j, AngMom, Polarization};
use crate::constants::{omega_from_lambda, C, EPS0, HBAR, RB87_F1_OFFSET_HZ, RB87_F2_OFFSET_HZ, RB87_TWO_I};
use crate::error::{ensure_nonneg, ensure_positive, invalid, Error, Result};

/// Line data shipped with the crate.
pub const RB87_LINES_JSON: &str = include_str!("../data/rb87_lines.json");

/// Environment variable naming a line-data file that replaces the built-in table.
pub const LINES_ENV: &str = "ATOMTRAP_LINES";

pub const GROUND: &str = "5S1/2";
pub const P12: &str = "5P1/2";
pub const P32: &str = "5P3/2";

/// A monochromatic laser field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserField {
    pub wavelength: f64,
    pub intensity: f64,
    pub polarization: Polarization,
}

impl LaserField {
    pub fn new(wavelength: f64, intensity: f64, polarization: Polarization) -> Result<Self> {
        ensure_positive("wavelength", wavelength)?;
        ensure_nonneg("intensity", intensity)?;
        Ok(Self { wavelength, intensity, polarization })
    }

    pub fn linear(wavelength: f64, intensity: f64) -> Result<Self> {
        Self::new(wavelength, intensity, Polarization::PI)
    }

    pub fn omega(&self) -> f64 {
        omega_from_lambda(self.wavelength)
    }

    /// Squared field amplitude |E|² = 2I/(ε₀c).
    pub fn field_sq(&self) -> f64 {
        2.0 * self.intensity / (EPS0 * C)
    }

    fn validate(&self) -> Result<()> {
        ensure_positive("wavelength", self.wavelength)?;
        ensure_nonneg("intensity", self.intensity)
    }
}

/// One fine-structure transition, `upper` decaying to `lower` with partial lifetime `lifetime`.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub label: String,
    pub lower: String,
    pub upper: String,
    /// Vacuum wavelength, m.
    pub wavelength: f64,
    /// Partial lifetime of the upper -> lower decay, s.
    pub lifetime: f64,
    pub j_lower: AngMom,
    pub j_upper: AngMom,
}

impl Line {
    pub fn omega(&self) -> f64 {
        omega_from_lambda(self.wavelength)
    }

    /// Decay rate Γ = 1/τ.
    pub fn gamma(&self) -> f64 {
        1.0 / self.lifetime
    }

    /// Line strength (2J+1)|⟨J||er||J'⟩|², symmetric in the two levels.
    pub fn strength(&self) -> f64 {
        3.0 * PI * EPS0 * HBAR * C.powi(3) * self.j_upper.multiplicity() as f64 / (self.omega().powi(3) * self.lifetime)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineRecord {
    label: String,
    lower: String,
    upper: String,
    lambda_nm: f64,
    lifetime_ns: f64,
    two_j_lower: u32,
    two_j_upper: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineFile {
    format: String,
    version: u32,
    atom: String,
    lines: Vec<LineRecord>,
}

/// Fine-structure couplings used by the light-shift sums.
#[derive(Debug, Clone, PartialEq)]
pub struct LineTable {
    lines: Vec<Line>,
}

impl LineTable {
    /// Builds a table, checking positivity and that each level pair appears once.
    pub fn new(lines: Vec<Line>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for l in &lines {
            if !(l.wavelength > 0.0 && l.wavelength.is_finite()) || !(l.lifetime > 0.0 && l.lifetime.is_finite()) {
                return Err(Error::LineData(format!("{}: wavelength and lifetime must be positive", l.label)));
            }
            if l.lower == l.upper {
                return Err(Error::LineData(format!("{}: lower and upper level coincide", l.label)));
            }
            if !seen.insert((l.lower.clone(), l.upper.clone())) {
                return Err(Error::LineData(format!("coupling {} -> {} listed twice", l.lower, l.upper)));
            }
        }
        Ok(Self { lines })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LineFile = serde_json::from_str(text).map_err(|e| Error::LineData(e.to_string()))?;
        if file.format != "atomtrap-lines" || file.version != 1 {
            return Err(Error::LineData(format!("unsupported format {} v{}", file.format, file.version)));
        }
        let lines = file
            .lines
            .into_iter()
            .map(|r| Line {
                label: r.label,
                lower: r.lower,
                upper: r.upper,
                wavelength: r.lambda_nm * 1e-9,
                lifetime: r.lifetime_ns * 1e-9,
                j_lower: AngMom::new(r.two_j_lower),
                j_upper: AngMom::new(r.two_j_upper),
            })
            .collect();
        Self::new(lines)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::LineData(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The built-in 87Rb table.
    pub fn rb87() -> Self {
        Self::from_json(RB87_LINES_JSON).expect("built-in line data is valid")
    }

    /// The table named by `ATOMTRAP_LINES`, or the built-in one.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(LINES_ENV) {
            Some(p) => Self::from_path(p),
            None => Ok(Self::rb87()),
        }
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    /// The line joining two levels, in either order.
    pub fn coupling(&self, a: &str, b: &str) -> Result<&Line> {
        self.lines
            .iter()
            .find(|l| (l.lower == a && l.upper == b) || (l.lower == b && l.upper == a))
            .ok_or_else(|| Error::MissingCoupling(format!("{a} -> {b}")))
    }

    /// All levels that occur in the table.
    pub fn levels(&self) -> BTreeSet<&str> {
        self.lines.iter().flat_map(|l| [l.lower.as_str(), l.upper.as_str()]).collect()
    }

    /// Angular momentum of a level as recorded in the table.
    pub fn level_j(&self, label: &str) -> Option<AngMom> {
        self.lines.iter().find_map(|l| {
            if l.lower == label {
                Some(l.j_lower)
            } else if l.upper == label {
                Some(l.j_upper)
            } else {
                None
            }
        })
    }
}

/// Hex SHA-256 of a byte string, used to pin line-data files.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A hyperfine Zeeman state |n J F m_F⟩ with I = 3/2.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperfineLevel {
    pub label: String,
    pub j: AngMom,
    pub f: AngMom,
    /// Doubled m_F.
    pub two_m: i32,
    /// Offset of this hyperfine level from the fine-structure centroid, rad/s.
    pub energy_offset: f64,
}

impl HyperfineLevel {
    pub fn new(label: impl Into<String>, j: AngMom, f: AngMom, two_m: i32, energy_offset: f64) -> Result<Self> {
        let i = AngMom::new(RB87_TWO_I);
        if !(f.two_j <= j.two_j + i.two_j && j.two_j <= f.two_j + i.two_j && i.two_j <= f.two_j + j.two_j)
            || (f.two_j + j.two_j + i.two_j) % 2 != 0
        {
            return Err(invalid("F", format!("F = {f} cannot couple J = {j} and I = 3/2")));
        }
        if two_m.unsigned_abs() > f.two_j || (f.two_j as i32 - two_m) % 2 != 0 {
            return Err(invalid("m_F", format!("2m_F = {two_m} invalid for F = {f}")));
        }
        Ok(Self { label: label.into(), j, f, two_m, energy_offset })
    }

    /// A 5S1/2 hyperfine state; `f` is 1 or 2 and `m` is the integer m_F.
    pub fn rb87_ground(f: u32, m: i32) -> Result<Self> {
        let offset = match f {
            1 => RB87_F1_OFFSET_HZ,
            2 => RB87_F2_OFFSET_HZ,
            _ => return Err(invalid("F", format!("5S1/2 has F = 1 or 2, got {f}"))),
        };
        Self::new(GROUND, AngMom::new(1), AngMom::int(f), 2 * m, 2.0 * PI * offset)
    }

    /// A 5P3/2 hyperfine state; excited hyperfine offsets are neglected.
    pub fn rb87_p32(f: u32, m: i32) -> Result<Self> {
        Self::new(P32, AngMom::new(3), AngMom::int(f), 2 * m, 0.0)
    }

    /// Every hyperfine Zeeman state of a fine-structure level, with zero offsets.
    pub fn manifold(label: &str, j: AngMom) -> Vec<Self> {
        let i = RB87_TWO_I;
        let lo = j.two_j.abs_diff(i);
        (lo..=j.two_j + i)
            .step_by(2)
            .flat_map(|tf| {
                let f = AngMom::new(tf);
                f.projections().map(move |m| (f, m)).collect::<Vec<_>>()
            })
            .map(|(f, m)| Self { label: label.to_string(), j, f, two_m: m, energy_offset: 0.0 })
            .collect()
    }
}

/// Which detuning enters the perturbative sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetuningModel {
    /// 1/Δ' = 1/(ω_if − ω) + 1/(ω_if + ω).
    #[default]
    Effective,
    /// Only the resonant 1/(ω_if − ω) term.
    RotatingWave,
}

/// One dipole coupling of a hyperfine state: transition frequency and |⟨i|d|f⟩|².
#[derive(Debug, Clone, Copy, PartialEq)]
struct Coupling {
    omega_if: f64,
    d_sq: f64,
}

fn couplings(level: &HyperfineLevel, pol: Polarization, lines: &LineTable) -> Result<Vec<Coupling>> {
    let i = AngMom::new(RB87_TWO_I);
    let touching: Vec<&Line> =
        lines.lines().iter().filter(|l| l.lower == level.label || l.upper == level.label).collect();
    if touching.is_empty() {
        return Err(Error::MissingCoupling(format!("{} -> any level", level.label)));
    }
    let eps = pol.epsilon();
    let mut out = Vec::new();
    for line in touching {
        let (j_other, omega_if) = if line.lower == level.label {
            if line.j_lower != level.j {
                return Err(Error::LineData(format!("{}: J of {} disagrees with the level", line.label, level.label)));
            }
            (line.j_upper, line.omega() - level.energy_offset)
        } else {
            if line.j_upper != level.j {
                return Err(Error::LineData(format!("{}: J of {} disagrees with the level", line.label, level.label)));
            }
            (line.j_lower, -line.omega() - level.energy_offset)
        };
        let reduced_sq = line.strength() / level.j.multiplicity() as f64;
        let two_m_p = level.two_m + 2 * eps;
        let lo = j_other.two_j.abs_diff(i.two_j);
        for tfp in (lo..=j_other.two_j + i.two_j).step_by(2) {
            if two_m_p.unsigned_abs() > tfp {
                continue;
            }
            let fp = AngMom::new(tfp);
            let six = wigner_6j(level.j, j_other, AngMom::int(1), fp, level.f, i)?;
            if six == 0.0 {
                continue;
            }
            let cg = clebsch_gordan(fp, two_m_p, AngMom::int(1), -2 * eps, level.f, level.two_m)?;
            let w = (tfp + 1) as f64 * level.j.multiplicity() as f64 * six * six * cg * cg;
            if w != 0.0 {
                out.push(Coupling { omega_if, d_sq: w * reduced_sq });
            }
        }
    }
    Ok(out)
}

fn sum_shift(cs: &[Coupling], field: &LaserField, model: DetuningModel) -> f64 {
    let w = field.omega();
    let pref = field.field_sq() / (4.0 * HBAR * HBAR);
    -pref
        * cs.iter()
            .map(|c| {
                let inv = match model {
                    DetuningModel::Effective => 1.0 / (c.omega_if - w) + 1.0 / (c.omega_if + w),
                    DetuningModel::RotatingWave => 1.0 / (c.omega_if - w),
                };
                c.d_sq * inv
            })
            .sum::<f64>()
}

/// Light shift ΔE/ħ (rad/s) of a hyperfine Zeeman state.
pub fn hyperfine_shift(level: &HyperfineLevel, field: &LaserField, lines: &LineTable) -> Result<f64> {
    hyperfine_shift_with(level, field, lines, DetuningModel::Effective)
}

pub fn hyperfine_shift_with(
    level: &HyperfineLevel,
    field: &LaserField,
    lines: &LineTable,
    model: DetuningModel,
) -> Result<f64> {
    field.validate()?;
    let cs = couplings(level, field.polarization, lines)?;
    Ok(sum_shift(&cs, field, model))
}

/// Precomputed couplings of all Zeeman states of a level, for fast wavelength scans.
#[derive(Debug, Clone)]
pub struct LevelShift {
    states: Vec<Vec<Coupling>>,
}

impl LevelShift {
    /// Equal-weight average over the given states.
    pub fn new(states: &[HyperfineLevel], pol: Polarization, lines: &LineTable) -> Result<Self> {
        if states.is_empty() {
            return Err(invalid("states", "no states to average"));
        }
        let states = states.iter().map(|s| couplings(s, pol, lines)).collect::<Result<_>>()?;
        Ok(Self { states })
    }

    /// Average over every hyperfine Zeeman state of a fine-structure level.
    pub fn manifold(label: &str, pol: Polarization, lines: &LineTable) -> Result<Self> {
        let j = lines.level_j(label).ok_or_else(|| Error::MissingCoupling(format!("{label} -> any level")))?;
        Self::new(&HyperfineLevel::manifold(label, j), pol, lines)
    }

    /// Mean shift ΔE/ħ in rad/s.
    pub fn mean(&self, field: &LaserField) -> f64 {
        self.states.iter().map(|cs| sum_shift(cs, field, DetuningModel::Effective)).sum::<f64>()
            / self.states.len() as f64
    }

    /// Transition frequencies at which the shift diverges.
    pub fn poles(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.states.iter().flatten().map(|c| c.omega_if.abs()).collect();
        p.sort_by(f64::total_cmp);
        p.dedup();
        p
    }
}

/// Mean light shift of a fine-structure level with equal Zeeman occupation, rad/s.
pub fn mean_level_shift(label: &str, field: &LaserField, lines: &LineTable) -> Result<f64> {
    field.validate()?;
    Ok(LevelShift::manifold(label, field.polarization, lines)?.mean(field))
}

/// Complex classical polarizability α(ω) of a damped oscillator (SI, C·m²/V).
pub fn classical_polarizability(omega: f64, omega0: f64, gamma_on_res: f64) -> Result<Complex64> {
    ensure_positive("omega0", omega0)?;
    let num = 6.0 * PI * EPS0 * C.powi(3) * gamma_on_res / (omega0 * omega0);
    let den = Complex64::new(omega0 * omega0 - omega * omega, -(omega.powi(3) / (omega0 * omega0)) * gamma_on_res);
    Ok(Complex64::new(num, 0.0) / den)
}

/// Two-level dipole potential in joule.
pub fn dipole_potential_two_level(field: &LaserField, omega0: f64, gamma: f64, rwa: bool) -> Result<f64> {
    field.validate()?;
    ensure_positive("omega0", omega0)?;
    let w = field.omega();
    let pref = 3.0 * PI * C * C / (2.0 * omega0.powi(3)) * field.intensity;
    if rwa {
        let delta = w - omega0;
        if delta == 0.0 {
            return Err(invalid("detuning", "zero detuning under the rotating-wave approximation"));
        }
        Ok(pref * gamma / delta)
    } else {
        Ok(-pref * (gamma / (omega0 - w) + gamma / (omega0 + w)))
    }
}

/// Two-level photon scattering rate in 1/s.
pub fn scattering_rate_two_level(field: &LaserField, omega0: f64, gamma: f64, rwa: bool) -> Result<f64> {
    field.validate()?;
    ensure_positive("omega0", omega0)?;
    let w = field.omega();
    let pref = 3.0 * PI * C * C / (2.0 * HBAR * omega0.powi(3)) * field.intensity;
    if rwa {
        let delta = w - omega0;
        if delta == 0.0 {
            return Err(invalid("detuning", "zero detuning under the rotating-wave approximation"));
        }
        Ok(pref * (gamma / delta).powi(2))
    } else {
        Ok(pref * (w / omega0).powi(3) * (gamma / (omega0 - w) + gamma / (omega0 + w)).powi(2))
    }
}

fn d_lines(lines: &LineTable) -> Result<(&Line, &Line)> {
    Ok((lines.coupling(GROUND, P12)?, lines.coupling(GROUND, P32)?))
}

/// Ground-state alkali potential (J) from the D1 and D2 lines; `two_m_j` is ±1.
pub fn ground_shift_alkali(field: &LaserField, two_m_j: i32, lines: &LineTable) -> Result<f64> {
    field.validate()?;
    if two_m_j.abs() != 1 {
        return Err(invalid("m_J", format!("2m_J must be ±1, got {two_m_j}")));
    }
    let (d1, d2) = d_lines(lines)?;
    let w = field.omega();
    let (delta1, delta2) = (w - d1.omega(), w - d2.omega());
    if delta1 == 0.0 || delta2 == 0.0 {
        return Err(invalid("detuning", "laser is resonant with a D line"));
    }
    // g_J m_J = 2 m_J = two_m_j.
    let pgm = field.polarization.epsilon() as f64 * two_m_j as f64;
    Ok(3.0 * PI * C * C / 2.0
        * (d1.gamma() * (1.0 - pgm) / (3.0 * d1.omega().powi(3) * delta1)
            + d2.gamma() * (2.0 + pgm) / (3.0 * d2.omega().powi(3) * delta2))
        * field.intensity)
}

/// Ground-state photon scattering rate for linear polarization, 1/s.
pub fn scattering_rate_alkali(field: &LaserField, lines: &LineTable) -> Result<f64> {
    field.validate()?;
    let (d1, d2) = d_lines(lines)?;
    let w = field.omega();
    let (delta1, delta2) = (w - d1.omega(), w - d2.omega());
    if delta1 == 0.0 || delta2 == 0.0 {
        return Err(invalid("detuning", "laser is resonant with a D line"));
    }
    Ok(PI * C * C / (2.0 * HBAR)
        * (d1.gamma().powi(2) / (d1.omega().powi(3) * delta1 * delta1)
            + 2.0 * d2.gamma().powi(2) / (d2.omega().powi(3) * delta2 * delta2))
        * field.intensity)
}

/// Ground minus averaged 5P3/2 shift at a given wavelength, per unit intensity.
struct MagicProblem {
    ground: LevelShift,
    excited: LevelShift,
}

impl MagicProblem {
    fn new(lines: &LineTable) -> Result<Self> {
        Ok(Self {
            ground: LevelShift::manifold(GROUND, Polarization::PI, lines)?,
            excited: LevelShift::manifold(P32, Polarization::PI, lines)?,
        })
    }

    fn eval(&self, wavelength: f64) -> f64 {
        let field = LaserField { wavelength, intensity: 1.0, polarization: Polarization::PI };
        self.ground.mean(&field) - self.excited.mean(&field)
    }

    /// Resonance wavelengths, ascending.
    fn pole_wavelengths(&self) -> Vec<f64> {
        let mut v: Vec<f64> =
            self.ground.poles().into_iter().chain(self.excited.poles()).map(crate::constants::lambda_from_omega).collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Wavelength in `bracket` at which 5S1/2 and the averaged 5P3/2 shift coincide.
///
/// The bracket is cut at every resonance; the first sign change between resonances
/// is refined by bisection.
pub fn find_magic_wavelength(lines: &LineTable, bracket: [f64; 2]) -> Result<f64> {
    let [lo, hi] = bracket;
    ensure_positive("bracket[0]", lo)?;
    ensure_positive("bracket[1]", hi)?;
    if lo >= hi {
        return Err(invalid("bracket", "lower end must be below upper end"));
    }
    let problem = MagicProblem::new(lines)?;
    let guard = 1e-9;
    let mut edges = vec![lo];
    for p in problem.pole_wavelengths() {
        if p > lo && p < hi {
            edges.push(p);
        }
    }
    edges.push(hi);
    for w in edges.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        if (b - a) / b < 4.0 * guard {
            continue;
        }
        if a != lo {
            a *= 1.0 + guard;
        }
        if b != hi {
            b *= 1.0 - guard;
        }
        let (fa, fb) = (problem.eval(a), problem.eval(b));
        if fa == 0.0 {
            return Ok(a);
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        return Ok(bisect(|x| problem.eval(x), a, b, fa, 1e-12));
    }
    Err(Error::NoSignChange { lo, hi })
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, rel_tol: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a) <= rel_tol * m {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
