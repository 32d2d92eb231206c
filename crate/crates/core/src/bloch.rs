//! Density-matrix dynamics of the two- and four-level atom and photon correlations g²(τ).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::constants::{
    mw_per_cm2, GAMMA_FOUR_LEVEL, HBAR, IS_12, IS_22, IS_23, KB, RB87_EXCITED_32_SPLIT_HZ,
};
use crate::error::{ensure_nonneg, ensure_positive, invalid, Error, Result};
use crate::lightshift::{hyperfine_shift, HyperfineLevel, LaserField, LineTable};
use crate::ode::{dopri5, OdeOptions};
use crate::optimize::{brent_minimize, grid_argmin};

type C64 = Complex64;

/// Complex Hermitian density matrix over a labeled basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub entries: DMatrix<C64>,
    pub basis_labels: Vec<String>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<C64>, basis_labels: Vec<String>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() != basis_labels.len() {
            return Err(invalid("entries", "matrix must be square and match the basis labels"));
        }
        Ok(Self { entries, basis_labels })
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(pops: &[f64], basis_labels: Vec<String>) -> Result<Self> {
        let n = pops.len();
        let m = DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(pops[i], 0.0) } else { C64::new(0.0, 0.0) });
        Self::new(m, basis_labels)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn population(&self, i: usize) -> f64 {
        self.entries[(i, i)].re
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// max |ρ − ρ†|.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut e: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                e = e.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        e
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Checks trace, Hermiticity and positivity.
    pub fn check(&self, trace_tol: f64, herm_tol: f64, eig_tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::Numerical(format!("trace {tr} differs from 1")));
        }
        let h = self.hermiticity_error();
        if h > herm_tol {
            return Err(Error::Numerical(format!("Hermiticity error {h:e}")));
        }
        let min = self.eigenvalues()[0];
        if min < -eig_tol {
            return Err(Error::Numerical(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    fn to_flat(&self) -> Vec<f64> {
        let n = self.dim();
        let mut v = Vec::with_capacity(2 * n * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.entries[(i, j)];
                v.push(z.re);
                v.push(z.im);
            }
        }
        v
    }

    fn from_flat(y: &[f64], labels: &[String]) -> Self {
        let n = labels.len();
        let m = DMatrix::from_fn(n, n, |i, j| C64::new(y[2 * (i * n + j)], y[2 * (i * n + j) + 1]));
        Self { entries: m, basis_labels: labels.to_vec() }
    }
}

/// Spontaneous-decay relaxation: population transfers and coherence damping rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation {
    /// (from, to, rate) population transfers.
    pub decays: Vec<(usize, usize, f64)>,
    /// Symmetric damping rates γ_ij of the coherences.
    pub dephasing: DMatrix<f64>,
}

/// Generator L of dρ/dt = −i[Ĥ, ρ] + R(ρ) acting on row-major vec(ρ).
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    pub dim: usize,
    pub matrix: DMatrix<C64>,
    pub basis_labels: Vec<String>,
}

impl Liouvillian {
    /// Assembles the generator from a Hamiltonian in rad/s and a relaxation model.
    pub fn assemble(h: &DMatrix<C64>, relax: &Relaxation, basis_labels: Vec<String>) -> Self {
        let n = h.nrows();
        let idx = |i: usize, j: usize| i * n + j;
        let mut l = DMatrix::<C64>::zeros(n * n, n * n);
        let mi = C64::new(0.0, -1.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    l[(idx(i, j), idx(k, j))] += mi * h[(i, k)];
                    l[(idx(i, j), idx(i, k))] -= mi * h[(k, j)];
                }
                if i != j {
                    l[(idx(i, j), idx(i, j))] -= C64::new(relax.dephasing[(i, j)], 0.0);
                }
            }
        }
        for &(from, to, rate) in &relax.decays {
            l[(idx(from, from), idx(from, from))] -= C64::new(rate, 0.0);
            l[(idx(to, to), idx(from, from))] += C64::new(rate, 0.0);
        }
        Self { dim: n, matrix: l, basis_labels }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let v = DVector::from_iterator(self.dim * self.dim, rho.entries.transpose().iter().copied());
        let out = &self.matrix * v;
        let n = self.dim;
        DensityMatrix { entries: DMatrix::from_fn(n, n, |i, j| out[i * n + j]), basis_labels: self.basis_labels.clone() }
    }

    /// Real representation acting on (ρ_00, …, ρ_nn, Re ρ_ij, Im ρ_ij for i < j).
    pub fn real_matrix(&self) -> DMatrix<f64> {
        let n = self.dim;
        let mut coords: Vec<(usize, usize, bool)> = (0..n).map(|i| (i, i, false)).collect();
        for i in 0..n {
            for j in i + 1..n {
                coords.push((i, j, false));
                coords.push((i, j, true));
            }
        }
        let dim = coords.len();
        let mut out = DMatrix::zeros(dim, dim);
        for (col, &(i, j, imag)) in coords.iter().enumerate() {
            let mut basis = DMatrix::<C64>::zeros(n, n);
            if i == j {
                basis[(i, i)] = C64::new(1.0, 0.0);
            } else if imag {
                basis[(i, j)] = C64::new(0.0, 1.0);
                basis[(j, i)] = C64::new(0.0, -1.0);
            } else {
                basis[(i, j)] = C64::new(1.0, 0.0);
                basis[(j, i)] = C64::new(1.0, 0.0);
            }
            let image = self.apply(&DensityMatrix { entries: basis, basis_labels: self.basis_labels.clone() }).entries;
            for (row, &(k, l, im)) in coords.iter().enumerate() {
                out[(row, col)] = if k == l {
                    image[(k, k)].re
                } else if im {
                    image[(k, l)].im
                } else {
                    image[(k, l)].re
                };
            }
        }
        out
    }

    /// Steady state from the null space of L with unit trace.
    pub fn steady_state(&self) -> Result<DensityMatrix> {
        let n = self.dim;
        let mut a = self.matrix.clone();
        let mut b = DVector::<C64>::zeros(n * n);
        // Population of the first level is redundant given trace conservation.
        for c in 0..n * n {
            a[(0, c)] = C64::new(0.0, 0.0);
        }
        for i in 0..n {
            a[(0, i * n + i)] = C64::new(1.0, 0.0);
        }
        b[0] = C64::new(1.0, 0.0);
        let x = a.lu().solve(&b).ok_or_else(|| Error::Numerical("Liouvillian steady state is not unique".into()))?;
        let m = DMatrix::from_fn(n, n, |i, j| x[i * n + j]);
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        DensityMatrix::new(m, self.basis_labels.clone())
    }

    /// Integrates ρ(t) from `rho0` at t = 0 and returns it on `t_grid`.
    pub fn evolve(&self, rho0: &DensityMatrix, t_grid: &[f64], opts: &OdeOptions) -> Result<Vec<DensityMatrix>> {
        let nn = self.dim * self.dim;
        let l = &self.matrix;
        let rhs = |_: f64, y: &[f64], d: &mut [f64]| {
            for r in 0..nn {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..nn {
                    let lv = l[(r, c)];
                    if lv.re != 0.0 || lv.im != 0.0 {
                        acc += lv * C64::new(y[2 * c], y[2 * c + 1]);
                    }
                }
                d[2 * r] = acc.re;
                d[2 * r + 1] = acc.im;
            }
        };
        let out = dopri5(rhs, 0.0, &rho0.to_flat(), t_grid, opts)?;
        Ok(out.iter().map(|y| DensityMatrix::from_flat(y, &self.basis_labels)).collect())
    }
}

/// Two-level driving: Rabi frequency Ω₀, detuning Δ = ω_L − ω₀ and decay rate Γ (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelParams {
    pub omega_rabi: f64,
    pub delta: f64,
    pub gamma: f64,
}

impl TwoLevelParams {
    pub fn new(omega_rabi: f64, delta: f64, gamma: f64) -> Result<Self> {
        ensure_nonneg("omega_rabi", omega_rabi)?;
        ensure_positive("gamma", gamma)?;
        if !delta.is_finite() {
            return Err(invalid("delta", "must be finite"));
        }
        Ok(Self { omega_rabi, delta, gamma })
    }

    /// Basis (g, e).
    pub fn liouvillian(&self) -> Liouvillian {
        let c = |x: f64| C64::new(x, 0.0);
        let h = DMatrix::from_row_slice(2, 2, &[c(0.0), c(-self.omega_rabi / 2.0), c(-self.omega_rabi / 2.0), c(-self.delta)]);
        let mut deph = DMatrix::zeros(2, 2);
        deph[(0, 1)] = self.gamma / 2.0;
        deph[(1, 0)] = self.gamma / 2.0;
        Liouvillian::assemble(&h, &Relaxation { decays: vec![(1, 0, self.gamma)], dephasing: deph }, vec!["g".into(), "e".into()])
    }

    /// Closed-form steady excited population.
    pub fn steady_excited(&self) -> f64 {
        let o2 = self.omega_rabi * self.omega_rabi;
        (o2 / 4.0) / (self.delta * self.delta + o2 / 2.0 + self.gamma * self.gamma / 4.0)
    }
}

/// Closed-form g²(τ) = 1 − e^{−3Γτ/4}[cos Ω_Rτ + (3Γ/4Ω_R) sin Ω_Rτ] with Ω_R² = Ω₀² + Δ² − Γ²/16.
///
/// When Ω_R² < 0 the hyperbolic continuation is used; Ω_R = 0 takes the limit.
pub fn two_level_g2_analytic(omega0_rabi: f64, delta: f64, gamma: f64, tau_grid: &[f64]) -> Vec<f64> {
    let or2 = omega0_rabi * omega0_rabi + delta * delta - gamma * gamma / 16.0;
    let k = 0.75 * gamma;
    tau_grid
        .iter()
        .map(|&t| {
            let env = (-k * t).exp();
            let osc = if or2 > 0.0 {
                let w = or2.sqrt();
                (w * t).cos() + k / w * (w * t).sin()
            } else if or2 < 0.0 {
                let w = (-or2).sqrt();
                (w * t).cosh() + k / w * (w * t).sinh()
            } else {
                1.0 + k * t
            };
            1.0 - env * osc
        })
        .collect()
}

/// Generalized Rabi frequency Ω_R = √(Ω₀² + Δ² − Γ²/16) of the closed-form g².
pub fn generalized_rabi(omega0_rabi: f64, delta: f64, gamma: f64) -> f64 {
    (omega0_rabi * omega0_rabi + delta * delta - gamma * gamma / 16.0).max(0.0).sqrt()
}

/// Rabi frequency Ω₀ giving a target Ω_R for the closed-form g².
pub fn rabi_for_generalized(omega_r: f64, delta: f64, gamma: f64) -> f64 {
    (omega_r * omega_r - delta * delta + gamma * gamma / 16.0).max(0.0).sqrt()
}

/// Options for the OBE integrations behind g²(τ).
pub fn g2_ode_options() -> OdeOptions {
    OdeOptions::default()
}

/// g²(τ) of the two-level OBE started in the ground state.
pub fn two_level_obe_g2(params: &TwoLevelParams, tau_grid: &[f64]) -> Result<Vec<f64>> {
    let l = params.liouvillian();
    let ss = l.steady_state()?;
    let pe = ss.population(1);
    if !(pe > 0.0) {
        return Err(Error::Numerical("steady excited population vanishes".into()));
    }
    let rho0 = DensityMatrix::diagonal(&[1.0, 0.0], l.basis_labels.clone())?;
    let traj = l.evolve(&rho0, tau_grid, &g2_ode_options())?;
    Ok(traj.iter().map(|r| r.population(1) / pe).collect())
}

/// Basis order of the four-level model: a = F'=2, b = F=1, c = F=2, d = F'=3.
pub const FOUR_LEVEL_LABELS: [&str; 4] = ["F'=2", "F=1", "F=2", "F'=3"];
pub const LEVEL_A: usize = 0;
pub const LEVEL_B: usize = 1;
pub const LEVEL_C: usize = 2;
pub const LEVEL_D: usize = 3;

/// Parameters of the four-level cooling/repump model (SI units, angular frequencies).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourLevelParams {
    /// Total cooling intensity, W/m².
    pub i_cl: f64,
    /// Repump intensity, W/m².
    pub i_rl: f64,
    /// Cooling detuning from F=2 -> F'=3.
    pub delta_cl: f64,
    /// Repump detuning from F=1 -> F'=2.
    pub delta_rl: f64,
    pub gamma: f64,
    pub gamma_ab: f64,
    pub gamma_ac: f64,
    /// F'=3 minus F'=2 energy.
    pub excited_split: f64,
    /// Light shifts of levels a, b, c, d.
    pub light_shifts: [f64; 4],
}

impl FourLevelParams {
    /// Intensities in mW/cm², cooling detuning in rad/s; other fields at their defaults.
    pub fn new(i_cl_mw_cm2: f64, i_rl_mw_cm2: f64, delta_cl: f64) -> Self {
        let gamma = GAMMA_FOUR_LEVEL;
        Self {
            i_cl: mw_per_cm2(i_cl_mw_cm2),
            i_rl: mw_per_cm2(i_rl_mw_cm2),
            delta_cl,
            delta_rl: 0.0,
            gamma,
            gamma_ab: gamma / 2.0,
            gamma_ac: gamma / 2.0,
            excited_split: 2.0 * PI * RB87_EXCITED_32_SPLIT_HZ,
            light_shifts: [0.0; 4],
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_nonneg("i_cl", self.i_cl)?;
        ensure_nonneg("i_rl", self.i_rl)?;
        ensure_positive("gamma", self.gamma)?;
        ensure_nonneg("gamma_ab", self.gamma_ab)?;
        ensure_nonneg("gamma_ac", self.gamma_ac)?;
        if ((self.gamma_ab + self.gamma_ac) / self.gamma - 1.0).abs() > 1e-12 {
            return Err(invalid("branching", "Γ_ab + Γ_ac must equal Γ"));
        }
        for v in [self.delta_cl, self.delta_rl, self.excited_split].iter().chain(&self.light_shifts) {
            if !v.is_finite() {
                return Err(invalid("detuning", "detunings and light shifts must be finite"));
            }
        }
        Ok(())
    }

    /// Ω₁ (repump F=1 -> F'=2), Ω₂ (cooling F=2 -> F'=2), Ω₃ (cooling F=2 -> F'=3).
    pub fn rabi_frequencies(&self) -> [f64; 3] {
        let g = self.gamma;
        [
            g * (self.i_rl / (2.0 * IS_12)).sqrt(),
            g * (self.i_cl / (2.0 * IS_22)).sqrt(),
            g * (self.i_cl / (2.0 * IS_23)).sqrt(),
        ]
    }

    /// Cooling detuning from F=2 -> F'=3 including light shifts.
    pub fn effective_delta_cl(&self) -> f64 {
        self.delta_cl - (self.light_shifts[LEVEL_D] - self.light_shifts[LEVEL_C])
    }

    /// Rotating-frame Hamiltonian in rad/s.
    pub fn hamiltonian(&self) -> DMatrix<C64> {
        let [o1, o2, o3] = self.rabi_frequencies();
        let s = &self.light_shifts;
        let e_c = s[LEVEL_C];
        let e_d = -self.delta_cl + s[LEVEL_D];
        let e_a = -self.delta_cl - self.excited_split + s[LEVEL_A];
        let e_b = -self.delta_cl - self.excited_split + self.delta_rl + s[LEVEL_B];
        let mut h = DMatrix::<C64>::zeros(4, 4);
        h[(LEVEL_A, LEVEL_A)] = e_a.into();
        h[(LEVEL_B, LEVEL_B)] = e_b.into();
        h[(LEVEL_C, LEVEL_C)] = e_c.into();
        h[(LEVEL_D, LEVEL_D)] = e_d.into();
        for (i, j, o) in [(LEVEL_A, LEVEL_B, o1), (LEVEL_A, LEVEL_C, o2), (LEVEL_C, LEVEL_D, o3)] {
            h[(i, j)] = (-o / 2.0).into();
            h[(j, i)] = (-o / 2.0).into();
        }
        h
    }

    pub fn relaxation(&self) -> Relaxation {
        let (gab, gac, gdc) = (self.gamma_ab, self.gamma_ac, self.gamma);
        let mut deph = DMatrix::zeros(4, 4);
        let mut set = |i: usize, j: usize, v: f64| {
            deph[(i, j)] = v;
            deph[(j, i)] = v;
        };
        set(LEVEL_A, LEVEL_B, 0.5 * (gab + gac));
        set(LEVEL_A, LEVEL_C, 0.5 * (gab + gac));
        set(LEVEL_A, LEVEL_D, 0.5 * (gab + gac + gdc));
        set(LEVEL_B, LEVEL_D, 0.5 * gdc);
        set(LEVEL_C, LEVEL_D, 0.5 * gdc);
        set(LEVEL_B, LEVEL_C, 0.0);
        Relaxation { decays: vec![(LEVEL_A, LEVEL_B, gab), (LEVEL_A, LEVEL_C, gac), (LEVEL_D, LEVEL_C, gdc)], dephasing: deph }
    }
}

/// Generator of the four-level optical Bloch equations.
pub fn four_level_liouvillian(params: &FourLevelParams) -> Result<Liouvillian> {
    params.validate()?;
    Ok(Liouvillian::assemble(
        &params.hamiltonian(),
        &params.relaxation(),
        FOUR_LEVEL_LABELS.iter().map(|s| s.to_string()).collect(),
    ))
}

/// Ground-state mixture immediately after any photon emission.
pub fn four_level_post_emission(params: &FourLevelParams, steady: &DensityMatrix) -> Result<DensityMatrix> {
    let (raa, rdd) = (steady.population(LEVEL_A), steady.population(LEVEL_D));
    let total = (params.gamma_ab + params.gamma_ac) * raa + params.gamma * rdd;
    if !(total > 0.0) {
        return Err(Error::Numerical("no steady-state excitation: g² undefined".into()));
    }
    let pb = params.gamma_ab * raa / total;
    let pc = (params.gamma_ac * raa + params.gamma * rdd) / total;
    DensityMatrix::diagonal(&[0.0, pb, pc, 0.0], steady.basis_labels.clone())
}

/// Full density-matrix trajectory after a photon emission, plus the steady state.
pub fn four_level_trajectory(params: &FourLevelParams, tau_grid: &[f64]) -> Result<(DensityMatrix, Vec<DensityMatrix>)> {
    let l = four_level_liouvillian(params)?;
    let ss = l.steady_state()?;
    let rho0 = four_level_post_emission(params, &ss)?;
    let traj = l.evolve(&rho0, tau_grid, &g2_ode_options())?;
    Ok((ss, traj))
}

/// g²(τ) = (ρ_aa + ρ_dd)(τ) / (ρ_aa + ρ_dd)(∞).
pub fn four_level_g2(params: &FourLevelParams, tau_grid: &[f64]) -> Result<Vec<f64>> {
    let (ss, traj) = four_level_trajectory(params, tau_grid)?;
    let exc = ss.population(LEVEL_A) + ss.population(LEVEL_D);
    if !(exc > 0.0) {
        return Err(Error::Numerical("no steady-state excitation: g² undefined".into()));
    }
    Ok(traj.iter().map(|r| (r.population(LEVEL_A) + r.population(LEVEL_D)) / exc).collect())
}

fn mean_shift(levels: Vec<HyperfineLevel>, field: &LaserField, lines: &LineTable) -> Result<f64> {
    let n = levels.len() as f64;
    let mut s = 0.0;
    for l in &levels {
        s += hyperfine_shift(l, field, lines)?;
    }
    Ok(s / n)
}

/// Light shifts (rad/s) of F'=2, F=1, F=2, F'=3 in a trap field, each averaged over m_F.
pub fn trap_light_shifts(trap_field: &LaserField, lines: &LineTable) -> Result<[f64; 4]> {
    let ground = |f: u32| -> Result<Vec<HyperfineLevel>> {
        (-(f as i32)..=f as i32).map(|m| HyperfineLevel::rb87_ground(f, m)).collect()
    };
    let excited = |f: u32| -> Result<Vec<HyperfineLevel>> {
        (-(f as i32)..=f as i32).map(|m| HyperfineLevel::rb87_p32(f, m)).collect()
    };
    Ok([
        mean_shift(excited(2)?, trap_field, lines)?,
        mean_shift(ground(1)?, trap_field, lines)?,
        mean_shift(ground(2)?, trap_field, lines)?,
        mean_shift(excited(3)?, trap_field, lines)?,
    ])
}

/// Adds trap light shifts to the four levels, reduced by the factor max(0, 1 − k_B T_kin / Û).
///
/// Û is the F=2 ground-state depth at the trap field; existing shifts are replaced.
pub fn apply_trap_shifts(
    params: &FourLevelParams,
    trap_field: &LaserField,
    kinetic_temperature: f64,
    lines: &LineTable,
) -> Result<FourLevelParams> {
    ensure_nonneg("kinetic_temperature", kinetic_temperature)?;
    let shifts = trap_light_shifts(trap_field, lines)?;
    let depth = (HBAR * shifts[LEVEL_C]).abs();
    let factor = if depth > 0.0 { (1.0 - KB * kinetic_temperature / depth).max(0.0) } else { 0.0 };
    let mut out = *params;
    out.light_shifts = shifts.map(|s| s * factor);
    Ok(out)
}

/// Free-diffusion spread σ(t) = √(2Dt).
pub fn diffusion_sigma(d: f64, t: f64) -> Result<f64> {
    ensure_nonneg("D", d)?;
    ensure_nonneg("t", t)?;
    Ok((2.0 * d * t).sqrt())
}

/// Diffusion envelope 1 + A e^{−τ/τ₀} of g²(τ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionEnvelope {
    pub a: f64,
    pub tau0: f64,
}

impl DiffusionEnvelope {
    pub fn new(a: f64, tau0: f64) -> Result<Self> {
        ensure_nonneg("A", a)?;
        ensure_positive("tau0", tau0)?;
        Ok(Self { a, tau0 })
    }

    /// Envelope of an atom diffusing with coefficient `d` in a standing wave of wavenumber `k`.
    pub fn from_diffusion(d: f64, k: f64) -> Result<Self> {
        ensure_positive("D", d)?;
        ensure_positive("k", k)?;
        Self::new(0.5, 1.0 / (4.0 * k * k * d))
    }

    pub fn eval(&self, tau: f64) -> f64 {
        1.0 + self.a * (-tau / self.tau0).exp()
    }
}

pub fn g2_total_envelope(env: &DiffusionEnvelope, tau_grid: &[f64]) -> Vec<f64> {
    tau_grid.iter().map(|&t| env.eval(t)).collect()
}

/// Four-level g² multiplied by the diffusion envelope.
pub fn g2_full_model(params: &FourLevelParams, env: &DiffusionEnvelope, tau_grid: &[f64]) -> Result<Vec<f64>> {
    let g = four_level_g2(params, tau_grid)?;
    Ok(g.iter().zip(tau_grid).map(|(g, &t)| g * env.eval(t)).collect())
}

/// Least-squares fit of 1 + A e^{−τ/τ₀}; A is solved in closed form for each trial τ₀.
pub fn fit_envelope(tau: &[f64], g2: &[f64]) -> Result<DiffusionEnvelope> {
    if tau.len() != g2.len() || tau.len() < 3 {
        return Err(invalid("data", "need at least three (τ, g²) pairs of equal length"));
    }
    let t_max = tau.iter().copied().fold(0.0, f64::max);
    let t_min_pos = tau.iter().copied().filter(|&t| t > 0.0).fold(f64::INFINITY, f64::min);
    if !(t_max > 0.0) || !t_min_pos.is_finite() {
        return Err(invalid("tau", "delays must include positive values"));
    }
    let amp = |tau0: f64| -> (f64, f64) {
        let (mut num, mut den) = (0.0, 0.0);
        for (&t, &g) in tau.iter().zip(g2) {
            let e = (-t / tau0).exp();
            num += e * (g - 1.0);
            den += e * e;
        }
        let a = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };
        let r = tau.iter().zip(g2).map(|(&t, &g)| (g - 1.0 - a * (-t / tau0).exp()).powi(2)).sum();
        (a, r)
    };
    let cost = |x: f64| amp(x.exp()).1;
    let (lo, hi) = ((0.1 * t_min_pos).ln(), (10.0 * t_max).ln());
    let n = 200;
    let (i, _) = grid_argmin(&cost, lo, hi, n);
    let step = (hi - lo) / n as f64;
    let a0 = lo + step * (i as f64 - 1.0).max(0.0);
    let b0 = (lo + step * (i as f64 + 1.0)).min(hi);
    let (x, _) = brent_minimize(cost, a0, b0, 1e-10, 200);
    let tau0 = x.exp();
    let (a, _) = amp(tau0);
    DiffusionEnvelope::new(a, tau0)
}

/// Excited-state survival probability e^{−Γt}.
pub fn excited_decay(gamma: f64, t: f64) -> f64 {
    (-gamma * t).exp()
}
