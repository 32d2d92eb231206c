//! Two-qubit state algebra: Bell states, spin correlations, CHSH and
//! Clauser-Horne statistics, fidelity estimates, the aperture-filtered
//! atom-photon state, and teleportation/swapping decompositions.
//!
//! Basis order is |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩ with the first factor belonging to particle A.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, Matrix2, Matrix3, Matrix4, Vector2, Vector4};
use num_complex::Complex64;

use crate::error::{ensure_nonneg, invalid, Error, Result};

type C64 = Complex64;

const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const ZERO: C64 = c(0.0, 0.0);

/// State tolerances shared with the density-matrix checks.
const TRACE_TOL: f64 = 1e-9;
const HERM_TOL: f64 = 1e-9;
const EIG_TOL: f64 = 1e-9;

pub fn pauli_x() -> Matrix2<C64> {
    Matrix2::new(ZERO, c(1.0, 0.0), c(1.0, 0.0), ZERO)
}

pub fn pauli_y() -> Matrix2<C64> {
    Matrix2::new(ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO)
}

pub fn pauli_z() -> Matrix2<C64> {
    Matrix2::new(c(1.0, 0.0), ZERO, ZERO, c(-1.0, 0.0))
}

fn kron(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

/// Rotation of one spin about y by polar angle θ.
pub fn rotation_y(theta: f64) -> Matrix2<C64> {
    let (s, co) = (0.5 * theta).sin_cos();
    Matrix2::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
}

/// Density matrix of two spin-½ particles.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: Matrix4<C64>,
}

impl TwoQubitState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: Matrix4<C64>) -> Result<Self> {
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(invalid("rho", format!("trace {tr} is not 1")));
        }
        let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > HERM_TOL {
            return Err(invalid("rho", format!("not Hermitian (error {herm:e})")));
        }
        let min_eig = rho.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -EIG_TOL {
            return Err(invalid("rho", format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { rho })
    }

    /// |ψ⟩⟨ψ| for a normalized vector.
    pub fn pure(psi: &Vector4<C64>) -> Result<Self> {
        let n = psi.norm_squared();
        if (n - 1.0).abs() > 1e-10 {
            return Err(invalid("psi", format!("norm² = {n} is not 1")));
        }
        Ok(Self { rho: psi * psi.adjoint() })
    }

    pub fn maximally_mixed() -> Self {
        Self { rho: Matrix4::identity() * c(0.25, 0.0) }
    }

    pub fn product(a: &Vector2<C64>, b: &Vector2<C64>) -> Result<Self> {
        let v = Vector4::from_fn(|i, _| a[i / 2] * b[i % 2]);
        Self::pure(&v)
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.rho
    }

    /// Populations in the computational basis.
    pub fn diagonal(&self) -> [f64; 4] {
        std::array::from_fn(|i| self.rho[(i, i)].re)
    }

    /// U_A ⊗ U_B ρ (U_A ⊗ U_B)†.
    pub fn transform(&self, ua: &Matrix2<C64>, ub: &Matrix2<C64>) -> Self {
        let u = kron(ua, ub);
        Self { rho: u * self.rho * u.adjoint() }
    }

    /// Diagonal after rotating spin A by θ_A and spin B by θ_B about y.
    pub fn rotated_diagonal(&self, theta_a: f64, theta_b: f64) -> [f64; 4] {
        self.transform(&rotation_y(theta_a), &rotation_y(theta_b)).diagonal()
    }

    /// Correlation tensor T_ij = tr(ρ σ_i ⊗ σ_j).
    pub fn correlation_tensor(&self) -> Matrix3<f64> {
        let s = [pauli_x(), pauli_y(), pauli_z()];
        Matrix3::from_fn(|i, j| (self.rho * kron(&s[i], &s[j])).trace().re)
    }
}

/// The four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellLabel {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [Self::PsiPlus, Self::PsiMinus, Self::PhiPlus, Self::PhiMinus];

    pub fn vector(self) -> Vector4<C64> {
        let s = FRAC_1_SQRT_2;
        let (i, j, sign) = match self {
            Self::PsiPlus => (1, 2, 1.0),
            Self::PsiMinus => (1, 2, -1.0),
            Self::PhiPlus => (0, 3, 1.0),
            Self::PhiMinus => (0, 3, -1.0),
        };
        let mut v = Vector4::zeros();
        v[i] = c(s, 0.0);
        v[j] = c(sign * s, 0.0);
        v
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::PsiPlus => "Psi+",
            Self::PsiMinus => "Psi-",
            Self::PhiPlus => "Phi+",
            Self::PhiMinus => "Phi-",
        }
    }
}

pub fn bell_state(which: BellLabel) -> TwoQubitState {
    let v = which.vector();
    TwoQubitState { rho: v * v.adjoint() }
}

/// Joint probability that both analyzers at φ_A, φ_B fire on the singlet.
pub fn singlet_joint_probability(phi_a: f64, phi_b: f64) -> f64 {
    0.5 * (0.5 * (phi_a - phi_b)).sin().powi(2)
}

/// P(φ_A | φ_B) for the singlet.
pub fn singlet_conditional_probability(phi_a: f64, phi_b: f64) -> f64 {
    (0.5 * (phi_a - phi_b)).sin().powi(2)
}

/// Analyzer direction on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementSetting {
    /// Equatorial analyzer at angle φ, direction (cos φ, sin φ, 0).
    Equatorial(f64),
    Direction([f64; 3]),
}

impl MeasurementSetting {
    pub fn unit_vector(self) -> Result<[f64; 3]> {
        match self {
            Self::Equatorial(phi) => Ok([phi.cos(), phi.sin(), 0.0]),
            Self::Direction(v) => {
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if (n - 1.0).abs() > 1e-9 {
                    return Err(invalid("setting", format!("direction has length {n}, expected 1")));
                }
                Ok(v)
            }
        }
    }

    /// σ⃗·n.
    pub fn operator(self) -> Result<Matrix2<C64>> {
        let n = self.unit_vector()?;
        Ok(pauli_x() * c(n[0], 0.0) + pauli_y() * c(n[1], 0.0) + pauli_z() * c(n[2], 0.0))
    }
}

/// E(a, b) = tr(ρ σ⃗·a ⊗ σ⃗·b).
pub fn correlation(rho: &TwoQubitState, a: MeasurementSetting, b: MeasurementSetting) -> Result<f64> {
    let op = kron(&a.operator()?, &b.operator()?);
    Ok((rho.rho * op).trace().re)
}

/// S = |E(a,b) − E(a,b′)| + |E(a′,b) + E(a′,b′)|.
pub fn chsh(
    rho: &TwoQubitState,
    a: MeasurementSetting,
    a_prime: MeasurementSetting,
    b: MeasurementSetting,
    b_prime: MeasurementSetting,
) -> Result<f64> {
    let e = |x, y| correlation(rho, x, y);
    Ok((e(a, b)? - e(a, b_prime)?).abs() + (e(a_prime, b)? + e(a_prime, b_prime)?).abs())
}

/// Largest CHSH value over all analyzer directions, 2√(t₁² + t₂²) from the correlation tensor.
pub fn chsh_optimal(rho: &TwoQubitState) -> f64 {
    let t = rho.correlation_tensor();
    let mut ev: Vec<f64> = (t.transpose() * t).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    2.0 * (ev[0].max(0.0) + ev[1].max(0.0)).sqrt()
}

/// Counts entering the Clauser-Horne ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChCounts {
    /// Coincidences at (a,b), (a,b′), (a′,b), (a′,b′).
    pub coincidences: [f64; 4],
    pub singles_a_prime: f64,
    pub singles_b: f64,
}

/// [N_AB(a,b) − N_AB(a,b′) + N_AB(a′,b) + N_AB(a′,b′)] / [N_A(a′) + N_B(b)]; ≤ 1 for local models.
pub fn clauser_horne(counts: &ChCounts) -> Result<f64> {
    for &n in counts.coincidences.iter().chain([&counts.singles_a_prime, &counts.singles_b]) {
        ensure_nonneg("counts", n)?;
    }
    let [ab, abp, apb, apbp] = counts.coincidences;
    let num = ab - abp + apb + apbp;
    if num == 0.0 && ab == 0.0 && abp == 0.0 && apb == 0.0 {
        return Ok(0.0);
    }
    let den = counts.singles_a_prime + counts.singles_b;
    if den <= 0.0 {
        return Err(invalid("counts", "singles must not both be zero when coincidences are present"));
    }
    Ok(num / den)
}

/// ⟨Ψ|ρ|Ψ⟩ for a pure target.
pub fn fidelity(rho: &TwoQubitState, target: &TwoQubitState) -> Result<f64> {
    let purity = (target.rho * target.rho).trace().re;
    if (purity - 1.0).abs() > 1e-9 {
        return Err(invalid("target", format!("must be pure, tr(ρ²) = {purity}")));
    }
    Ok((rho.rho * target.rho).trace().re)
}

/// p|Ψ⟩⟨Ψ| + (1 − p)/4 · 1.
pub fn noisy_channel(target: &TwoQubitState, p: f64) -> Result<TwoQubitState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("must lie in [0, 1], got {p}")));
    }
    Ok(TwoQubitState { rho: target.rho * c(p, 0.0) + Matrix4::identity() * c(0.25 * (1.0 - p), 0.0) })
}

/// Smallest p for which the white-noise channel admits a CHSH violation, found by bisection.
pub fn noisy_violation_threshold(target: &TwoQubitState) -> Result<f64> {
    let s = |p: f64| noisy_channel(target, p).map(|r| chsh_optimal(&r) - 2.0);
    let (mut lo, mut hi) = (0.0, 1.0);
    if s(hi)? <= 0.0 {
        return Err(Error::Numerical("target state does not violate CHSH".into()));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if s(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Lower bound of the Ψ⁺ fidelity from diagonal elements.
///
/// `diag_z` holds ρ in the computational basis and `diag_rotated` the same after spin A is
/// rotated by +π/2 and spin B by −π/2 about y (see [`TwoQubitState::rotated_diagonal`]).
/// Order: ↑↑, ↑↓, ↓↑, ↓↓.
pub fn fidelity_lower_bound(diag_z: [f64; 4], diag_rotated: [f64; 4]) -> Result<f64> {
    for &v in diag_z.iter().chain(&diag_rotated) {
        ensure_nonneg("diagonal", v)?;
    }
    let [uu, ud, du, dd] = diag_z;
    let [ruu, rud, rdu, rdd] = diag_rotated;
    Ok(0.5 * (du + ud - 2.0 * (dd * uu).sqrt() + rdu + rud - rdd - ruu))
}

/// Mean visibility V̄ → fidelity (3V̄ + 1)/4 under white noise.
pub fn visibility_to_fidelity(v_x: f64, v_y: f64) -> Result<f64> {
    for v in [v_x, v_y] {
        if !(0.0..=1.0).contains(&v) {
            return Err(invalid("visibility", format!("must lie in [0, 1], got {v}")));
        }
    }
    Ok((3.0 * 0.5 * (v_x + v_y) + 1.0) / 4.0)
}

/// Complementary analysis bases of the atomic qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisBasis {
    X,
    Y,
}

/// P(F=1 | detector 1) = ½(1 + V cos(2β − offset)); offset 0 for x and π/2 for y.
pub fn correlation_curve(basis: AnalysisBasis, beta_grid: &[f64], v: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid("visibility", format!("must lie in [0, 1], got {v}")));
    }
    let offset = match basis {
        AnalysisBasis::X => 0.0,
        AnalysisBasis::Y => 0.5 * PI,
    };
    Ok(beta_grid.iter().map(|b| 0.5 * (1.0 + v * (2.0 * b - offset).cos())).collect())
}

/// Angular weighting of the collection optics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CollectionProfile {
    /// Every direction inside the cone is collected equally.
    HardCone,
    /// Single-mode coupling weight exp(−2 sin²θ / NA²).
    GaussianMode { na: f64 },
}

/// Atom ⊗ photon state after post-selecting on a detected photon.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomPhotonState {
    /// 9×9 density matrix over atom {|1,−1⟩, |1,0⟩, |1,+1⟩} ⊗ photon {σ⁺, π, σ⁻}.
    pub rho: DMatrix<C64>,
    pub labels: Vec<String>,
    /// Overlap with (|1,−1⟩|σ⁺⟩ + |1,+1⟩|σ⁻⟩)/√2.
    pub fidelity: f64,
    /// √fidelity, the convention tr√(√ρ σ √ρ) for a pure target.
    pub root_fidelity: f64,
    /// Fraction of all emitted photons that are collected.
    pub collected_fraction: f64,
}

const ATOM_LABELS: [&str; 3] = ["|1,-1>", "|1,0>", "|1,+1>"];
const PHOTON_LABELS: [&str; 3] = ["sigma+", "pi", "sigma-"];

/// Emission from F'=0 collected within half-angle θ_max about the quantization axis.
pub fn atom_photon_state(theta_max: f64, profile: CollectionProfile) -> Result<AtomPhotonState> {
    if !(theta_max > 0.0 && theta_max <= 0.5 * PI) {
        return Err(invalid("theta_max", format!("must lie in (0, π/2], got {theta_max}")));
    }
    let weight: Box<dyn Fn(f64) -> f64> = match profile {
        CollectionProfile::HardCone => Box::new(|_| 1.0),
        CollectionProfile::GaussianMode { na } => {
            if !(na > 0.0 && na <= 1.0) {
                return Err(invalid("na", format!("must lie in (0, 1], got {na}")));
            }
            Box::new(move |th: f64| (-2.0 * th.sin().powi(2) / (na * na)).exp())
        }
    };
    // Per direction: (1/√2)[√((1+cos²θ)/2)(|−1,σ⁺⟩ + |+1,σ⁻⟩) + sinθ|0,π⟩].
    let idx = |atom: usize, photon: usize| 3 * atom + photon;
    let (a_pm, a_pi) = (idx(0, 0), idx(1, 1));
    let a_mp = idx(2, 2);
    let n = 2000;
    let h = theta_max / n as f64;
    let mut m = [[0.0; 2]; 2];
    let mut total = 0.0;
    for k in 0..=n {
        let th = k as f64 * h;
        let simpson = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        let w = simpson * weight(th) * th.sin();
        let amp_sigma = FRAC_1_SQRT_2 * (0.5 * (1.0 + th.cos().powi(2))).sqrt();
        let amp_pi = FRAC_1_SQRT_2 * th.sin();
        m[0][0] += w * amp_sigma * amp_sigma;
        m[0][1] += w * amp_sigma * amp_pi;
        m[1][1] += w * amp_pi * amp_pi;
        total += w;
    }
    let norm = 2.0 * m[0][0] + m[1][1];
    let mut rho = DMatrix::from_element(9, 9, ZERO);
    for &(i, j, v) in &[
        (a_pm, a_pm, m[0][0]),
        (a_mp, a_mp, m[0][0]),
        (a_pm, a_mp, m[0][0]),
        (a_mp, a_pm, m[0][0]),
        (a_pi, a_pi, m[1][1]),
        (a_pm, a_pi, m[0][1]),
        (a_pi, a_pm, m[0][1]),
        (a_mp, a_pi, m[0][1]),
        (a_pi, a_mp, m[0][1]),
    ] {
        rho[(i, j)] = c(v / norm, 0.0);
    }
    let fidelity = 0.5 * (rho[(a_pm, a_pm)] + rho[(a_mp, a_mp)] + rho[(a_pm, a_mp)] + rho[(a_mp, a_pm)]).re;
    // Every direction carries unit emission probability per steradian weight 1/(4π)·2π sinθ dθ.
    let collected_fraction = 0.5 * total * h / 3.0;
    let labels = ATOM_LABELS
        .iter()
        .flat_map(|a| PHOTON_LABELS.iter().map(move |p| format!("{a}{p}")))
        .collect();
    Ok(AtomPhotonState { rho, labels, fidelity, root_fidelity: fidelity.sqrt(), collected_fraction })
}

/// Half-angle of the collection cone for numerical aperture `na` (in vacuum).
pub fn na_to_theta(na: f64) -> Result<f64> {
    if !(na > 0.0 && na <= 1.0) {
        return Err(invalid("na", format!("must lie in (0, 1], got {na}")));
    }
    Ok(na.asin())
}

/// Atom-photon state collected uniformly within the cone of numerical aperture `na`.
pub fn aperture_state(na: f64) -> Result<AtomPhotonState> {
    atom_photon_state(na_to_theta(na)?, CollectionProfile::HardCone)
}

/// One outcome of the Bell measurement in a teleportation.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportBranch {
    pub label: BellLabel,
    pub probability: f64,
    /// Bob's particle C conditioned on the outcome.
    pub state: Vector2<C64>,
    /// Bob's unitary restoring the input up to a global phase.
    pub correction: Matrix2<C64>,
}

/// Projects (α|↑⟩ + β|↓⟩)_A ⊗ Ψ⁻_BC onto the Bell basis of AB.
pub fn teleport_decompose(alpha: C64, beta: C64) -> Result<Vec<TeleportBranch>> {
    let n = alpha.norm_sqr() + beta.norm_sqr();
    if (n - 1.0).abs() > 1e-10 {
        return Err(invalid("alpha, beta", format!("|α|² + |β|² = {n} is not 1")));
    }
    let input = [alpha, beta];
    let singlet = BellLabel::PsiMinus.vector();
    // |ABC⟩ with index 4a + 2b + c.
    let abc: Vec<C64> = (0..8).map(|i| input[i / 4] * singlet[i % 4]).collect();
    let i2 = Matrix2::identity();
    Ok(BellLabel::ALL
        .iter()
        .map(|&label| {
            let bell = label.vector();
            let mut s = Vector2::zeros();
            for ab in 0..4 {
                for cc in 0..2 {
                    s[cc] += bell[ab].conj() * abc[2 * ab + cc];
                }
            }
            let p = s.norm_squared();
            let correction = match label {
                BellLabel::PsiMinus => i2,
                BellLabel::PsiPlus => pauli_z(),
                BellLabel::PhiMinus => pauli_x(),
                BellLabel::PhiPlus => pauli_z() * pauli_x(),
            };
            TeleportBranch { label, probability: p, state: s / c(p.sqrt(), 0.0), correction }
        })
        .collect())
}

/// Coefficients ⟨X_AD ⊗ Y_BC | Ψ⁻_AB ⊗ Ψ⁻_CD⟩ for all Bell pairs, in `BellLabel::ALL` order.
pub fn swap_decompose() -> Vec<(BellLabel, BellLabel, C64)> {
    let psi = BellLabel::PsiMinus.vector();
    // Four-particle amplitude with bits (a, b, c, d).
    let amp = |a: usize, b: usize, cc: usize, d: usize| psi[2 * a + b] * psi[2 * cc + d];
    let mut out = Vec::with_capacity(16);
    for &x in &BellLabel::ALL {
        for &y in &BellLabel::ALL {
            let (vx, vy) = (x.vector(), y.vector());
            let mut s = ZERO;
            for bits in 0..16 {
                let (a, b, cc, d) = (bits >> 3 & 1, bits >> 2 & 1, bits >> 1 & 1, bits & 1);
                s += vx[2 * a + d].conj() * vy[2 * b + cc].conj() * amp(a, b, cc, d);
            }
            out.push((x, y, s));
        }
    }
    out
}

/// Atom-atom pairs per minute: ¼η²T² per attempt, `cycle_s` per attempt, times a duty multiplier.
pub fn pair_rate_estimate(eta: f64, t_fiber: f64, cycle_s: f64, multiplier: f64) -> Result<f64> {
    for (name, v) in [("eta", eta), ("t_fiber", t_fiber)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(invalid(name, format!("must lie in [0, 1], got {v}")));
        }
    }
    if !(cycle_s > 0.0 && cycle_s.is_finite()) {
        return Err(invalid("cycle_s", format!("must be positive, got {cycle_s}")));
    }
    ensure_nonneg("multiplier", multiplier)?;
    Ok(0.25 * eta * eta * t_fiber * t_fiber / cycle_s * 60.0 * multiplier)
}
