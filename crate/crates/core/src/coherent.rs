//! Pure-state coherent dynamics: Λ and tripod dark states, STIRAP transfer,
//! the polarization readout law and Larmor precession of Zeeman superpositions.
//!
//! Couplings follow one convention throughout: the intermediate level `a`
//! couples to a lower level `k` through `H_ak = Ω_k e^{iχ_k} / 2` (ħ = 1,
//! rad/s), where `χ_k` is the phase of the beam driving that transition.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::constants::{HBAR, MU_B};
use crate::error::{ensure_nonneg, ensure_positive, invalid, Result};
use crate::ode::{dopri5, OdeOptions};

type C64 = Complex64;

const NORM_TOL: f64 = 1e-10;

pub const LAMBDA_LABELS: [&str; 3] = ["a", "b", "c"];
pub const TRIPOD_LABELS: [&str; 4] = ["a", "b-", "b+", "c"];
pub const ZEEMAN_LABELS: [&str; 2] = ["m=-1", "m=+1"];

/// Normalized state vector over a labeled basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    pub amplitudes: Vec<C64>,
    pub labels: Vec<String>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, labels: Vec<String>) -> Result<Self> {
        if amplitudes.len() != labels.len() || amplitudes.is_empty() {
            return Err(invalid("amplitudes", "need one amplitude per basis label"));
        }
        let n = norm_sq(&amplitudes);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(invalid("amplitudes", format!("norm² = {n} is not 1")));
        }
        Ok(Self { amplitudes, labels })
    }

    /// Basis state `|index⟩`.
    pub fn basis(index: usize, labels: &[&str]) -> Result<Self> {
        if index >= labels.len() {
            return Err(invalid("index", format!("{index} outside a basis of {}", labels.len())));
        }
        let mut amps = vec![C64::new(0.0, 0.0); labels.len()];
        amps[index] = C64::new(1.0, 0.0);
        Self::new(amps, to_labels(labels))
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &PureState) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.amplitudes)
    }
}

fn norm_sq(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

fn to_labels(labels: &[&str]) -> Vec<String> {
    labels.iter().map(|s| s.to_string()).collect()
}

fn cis(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

/// Λ dark state (|b⟩ − e^{i(φ₁−φ₂)}|c⟩)/√2 for equal Rabi frequencies.
pub fn lambda_dark_state(phi1: f64, phi2: f64) -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps = vec![C64::new(0.0, 0.0), C64::new(s, 0.0), -cis(phi1 - phi2) * s];
    PureState { amplitudes: amps, labels: to_labels(&LAMBDA_LABELS) }
}

/// Orthogonal bright partner (|b⟩ + e^{i(φ₁−φ₂)}|c⟩)/√2.
pub fn lambda_bright_state(phi1: f64, phi2: f64) -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps = vec![C64::new(0.0, 0.0), C64::new(s, 0.0), cis(phi1 - phi2) * s];
    PureState { amplitudes: amps, labels: to_labels(&LAMBDA_LABELS) }
}

/// Λ Hamiltonian (rad/s) with one-photon detuning `delta` and two-photon detuning `two_photon`.
pub fn lambda_hamiltonian(omega1: f64, omega2: f64, phi1: f64, phi2: f64, delta: f64, two_photon: f64) -> DMatrix<C64> {
    star_hamiltonian(&[omega1 * cis(phi1) * 0.5, omega2 * cis(phi2) * 0.5], &[-delta, 0.0, -two_photon])
}

/// Tripod Hamiltonian over `a, b−, b+, c`; φ₁ is the phase of Ω₁₋ relative to Ω₁₊ and φ₂ that of Ω₁₋ relative to Ω₂.
pub fn tripod_hamiltonian(omega_1m: f64, omega_1p: f64, omega_2: f64, phi1: f64, phi2: f64, delta: f64) -> DMatrix<C64> {
    star_hamiltonian(
        &[C64::new(omega_1m * 0.5, 0.0), omega_1p * cis(-phi1) * 0.5, omega_2 * cis(-phi2) * 0.5],
        &[-delta, 0.0, 0.0, 0.0],
    )
}

fn star_hamiltonian(couplings: &[C64], diag: &[f64]) -> DMatrix<C64> {
    let n = couplings.len() + 1;
    let mut h = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (i, &d) in diag.iter().enumerate() {
        h[(i, i)] = C64::new(d, 0.0);
    }
    for (k, &g) in couplings.iter().enumerate() {
        h[(0, k + 1)] = g;
        h[(k + 1, 0)] = g.conj();
    }
    h
}

/// The two tripod dark states (ψ¹, ψ²) for mixing angles θ, Φ.
pub fn tripod_dark_states(theta: f64, big_phi: f64, phi1: f64, phi2: f64) -> (PureState, PureState) {
    let z = C64::new(0.0, 0.0);
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = big_phi.sin_cos();
    let d1 = vec![z, C64::new(ct * sp, 0.0), cis(phi1) * (ct * cp), -cis(phi2) * st];
    let d2 = vec![z, C64::new(cp, 0.0), -cis(phi1) * sp, z];
    let labels = to_labels(&TRIPOD_LABELS);
    (
        PureState { amplitudes: d1, labels: labels.clone() },
        PureState { amplitudes: d2, labels },
    )
}

/// Time profile of a single pulse, before scaling by its peak Rabi frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseShape {
    /// cos²(π(t − center)/(2·fwhm)) on [center − fwhm, center + fwhm]; `fwhm` is the full width at half maximum.
    Sin2 { center: f64, fwhm: f64 },
    /// Gaussian truncated at ±4σ.
    Gaussian { center: f64, sigma: f64 },
    /// Linear interpolation of samples, zero outside.
    Samples { times: Vec<f64>, values: Vec<f64> },
}

const GAUSS_CUT: f64 = 4.0;

impl PulseShape {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Sin2 { center, fwhm } => {
                if !center.is_finite() {
                    return Err(invalid("center", "must be finite"));
                }
                ensure_positive("fwhm", *fwhm)
            }
            Self::Gaussian { center, sigma } => {
                if !center.is_finite() {
                    return Err(invalid("center", "must be finite"));
                }
                ensure_positive("sigma", *sigma)
            }
            Self::Samples { times, values } => {
                if times.len() != values.len() || times.len() < 2 {
                    return Err(invalid("samples", "need at least two (time, value) pairs"));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
                    return Err(invalid("samples", "times must be finite and strictly increasing"));
                }
                for &v in values {
                    ensure_nonneg("samples", v)?;
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Sin2 { center, fwhm } => {
                let x = (t - center) / fwhm;
                if x.abs() <= 1.0 {
                    (0.5 * PI * x).cos().powi(2)
                } else {
                    0.0
                }
            }
            Self::Gaussian { center, sigma } => {
                let x = (t - center) / sigma;
                if x.abs() <= GAUSS_CUT {
                    (-0.5 * x * x).exp()
                } else {
                    0.0
                }
            }
            Self::Samples { times, values } => {
                let n = times.len();
                if t < times[0] || t > times[n - 1] {
                    return 0.0;
                }
                let i = times.partition_point(|&x| x <= t).clamp(1, n - 1);
                let (t0, t1) = (times[i - 1], times[i]);
                let w = (t - t0) / (t1 - t0);
                values[i - 1] * (1.0 - w) + values[i] * w
            }
        }
    }

    /// Interval outside which the pulse vanishes.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Sin2 { center, fwhm } => (center - fwhm, center + fwhm),
            Self::Gaussian { center, sigma } => (center - GAUSS_CUT * sigma, center + GAUSS_CUT * sigma),
            Self::Samples { times, .. } => (times[0], times[times.len() - 1]),
        }
    }
}

/// One beam: peak Rabi frequency (rad/s), shape and optical phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub peak: f64,
    pub shape: PulseShape,
    pub phase: f64,
}

impl Pulse {
    pub fn new(peak: f64, shape: PulseShape, phase: f64) -> Result<Self> {
        let p = Self { peak, shape, phase };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_nonneg("peak", self.peak)?;
        if !self.phase.is_finite() {
            return Err(invalid("phase", "must be finite"));
        }
        self.shape.validate()
    }

    pub fn envelope(&self, t: f64) -> f64 {
        self.peak * self.shape.value(t)
    }
}

/// Pump (a ↔ b) and Stokes (a ↔ c) pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    pub pump: Pulse,
    pub stokes: Pulse,
}

impl PulseSchedule {
    pub fn new(pump: Pulse, stokes: Pulse) -> Result<Self> {
        pump.validate()?;
        stokes.validate()?;
        Ok(Self { pump, stokes })
    }

    /// Stokes first, pump delayed by half the pulse width; both sin² with FWHM `width` and peak `omega0`.
    pub fn counter_intuitive(omega0: f64, width: f64) -> Result<Self> {
        Self::new(
            Pulse::new(omega0, PulseShape::Sin2 { center: 1.5 * width, fwhm: width }, 0.0)?,
            Pulse::new(omega0, PulseShape::Sin2 { center: width, fwhm: width }, 0.0)?,
        )
    }

    /// Pump first, Stokes delayed by half the pulse width.
    pub fn intuitive(omega0: f64, width: f64) -> Result<Self> {
        Self::new(
            Pulse::new(omega0, PulseShape::Sin2 { center: width, fwhm: width }, 0.0)?,
            Pulse::new(omega0, PulseShape::Sin2 { center: 1.5 * width, fwhm: width }, 0.0)?,
        )
    }

    pub fn with_phases(mut self, pump_phase: f64, stokes_phase: f64) -> Self {
        self.pump.phase = pump_phase;
        self.stokes.phase = stokes_phase;
        self
    }

    /// Union of both supports.
    pub fn span(&self) -> (f64, f64) {
        let (a0, a1) = self.pump.shape.support();
        let (b0, b1) = self.stokes.shape.support();
        (a0.min(b0), a1.max(b1))
    }

    /// Mixing angle θ(t) with tan θ = Ω_pump/Ω_Stokes.
    pub fn mixing_angle(&self, t: f64) -> f64 {
        self.pump.envelope(t).atan2(self.stokes.envelope(t))
    }
}

/// Final amplitudes and bookkeeping of a coherent transfer.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferOutcome {
    /// Amplitudes at the end of the schedule; the norm is below one when loss is on.
    pub amplitudes: Vec<C64>,
    pub labels: Vec<String>,
    /// Population of the target level.
    pub efficiency: f64,
    /// ∫Γ|c_a|² dt.
    pub scattered: f64,
    pub max_intermediate: f64,
    pub times: Vec<f64>,
    /// Populations at each sample time, one row per time.
    pub populations: Vec<Vec<f64>>,
}

impl TransferOutcome {
    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.amplitudes)
    }
}

/// Sampling and tolerance settings for the pulse integrations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferOptions {
    pub samples: usize,
    pub ode: OdeOptions,
}

impl Default for TransferOptions {
    fn default() -> Self {
        Self { samples: 2001, ode: OdeOptions::default() }
    }
}

/// Λ STIRAP: transfers population b → c; `detunings` = [one-photon Δ, two-photon δ].
pub fn stirap_evolve(
    schedule: &PulseSchedule,
    initial: &PureState,
    detunings: [f64; 2],
    loss_gamma: f64,
) -> Result<TransferOutcome> {
    stirap_evolve_with(schedule, initial, detunings, loss_gamma, &TransferOptions::default())
}

pub fn stirap_evolve_with(
    schedule: &PulseSchedule,
    initial: &PureState,
    detunings: [f64; 2],
    loss_gamma: f64,
    opts: &TransferOptions,
) -> Result<TransferOutcome> {
    if initial.dim() != 3 {
        return Err(invalid("initial", "Λ system needs three amplitudes (a, b, c)"));
    }
    let (pump, stokes) = (&schedule.pump, &schedule.stokes);
    let couplings = |t: f64, out: &mut [C64]| {
        out[0] = cis(pump.phase) * (0.5 * pump.envelope(t));
        out[1] = cis(stokes.phase) * (0.5 * stokes.envelope(t));
    };
    let diag = [-detunings[0], 0.0, -detunings[1]];
    evolve_star(schedule.span(), &couplings, &diag, initial, loss_gamma, 2, &LAMBDA_LABELS, opts)
}

/// Tripod STIRAP over `a, b−, b+, c`: the pump envelope is split into Ω₁₋ = Ω₁ sin Φ and
/// Ω₁₊ = Ω₁ cos Φ with relative phase φ₁; the target is `c`.
pub fn tripod_evolve(
    schedule: &PulseSchedule,
    big_phi: f64,
    phi1: f64,
    initial: &PureState,
    detunings: [f64; 2],
    loss_gamma: f64,
) -> Result<TransferOutcome> {
    if initial.dim() != 4 {
        return Err(invalid("initial", "tripod needs four amplitudes (a, b-, b+, c)"));
    }
    let (pump, stokes) = (&schedule.pump, &schedule.stokes);
    let (sp, cp) = big_phi.sin_cos();
    let couplings = |t: f64, out: &mut [C64]| {
        let o1 = 0.5 * pump.envelope(t);
        out[0] = cis(pump.phase) * (o1 * sp);
        out[1] = cis(pump.phase - phi1) * (o1 * cp);
        out[2] = cis(stokes.phase) * (0.5 * stokes.envelope(t));
    };
    let diag = [-detunings[0], 0.0, 0.0, -detunings[1]];
    evolve_star(schedule.span(), &couplings, &diag, initial, loss_gamma, 3, &TRIPOD_LABELS, &TransferOptions::default())
}

/// Integrates i ċ = H c for a level `0` coupled to every other level, with decay Γ out of level 0.
#[allow(clippy::too_many_arguments)]
fn evolve_star(
    span: (f64, f64),
    couplings: &dyn Fn(f64, &mut [C64]),
    diag: &[f64],
    initial: &PureState,
    loss_gamma: f64,
    target: usize,
    labels: &[&str],
    opts: &TransferOptions,
) -> Result<TransferOutcome> {
    ensure_nonneg("loss_gamma", loss_gamma)?;
    for &d in diag {
        if !d.is_finite() {
            return Err(invalid("detunings", "must be finite"));
        }
    }
    if opts.samples < 2 {
        return Err(invalid("samples", "need at least two sample times"));
    }
    let n = diag.len();
    let (t0, t1) = span;
    let times: Vec<f64> = (0..opts.samples).map(|i| t0 + (t1 - t0) * i as f64 / (opts.samples - 1) as f64).collect();

    let mut y0 = vec![0.0; 2 * n + 1];
    for (i, c) in initial.amplitudes.iter().enumerate() {
        y0[2 * i] = c.re;
        y0[2 * i + 1] = c.im;
    }
    let mut g = vec![C64::new(0.0, 0.0); n - 1];
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        couplings(t, &mut g);
        let c = |i: usize| C64::new(y[2 * i], y[2 * i + 1]);
        let ca = c(0);
        let mut da = C64::new(diag[0], 0.0) * ca;
        for k in 1..n {
            let ck = c(k);
            da += g[k - 1] * ck;
            let dk = -C64::i() * (g[k - 1].conj() * ca + diag[k] * ck);
            dy[2 * k] = dk.re;
            dy[2 * k + 1] = dk.im;
        }
        let da = -C64::i() * da - 0.5 * loss_gamma * ca;
        dy[0] = da.re;
        dy[1] = da.im;
        dy[2 * n] = loss_gamma * ca.norm_sqr();
    };
    let traj = dopri5(rhs, t0, &y0, &times, &opts.ode)?;

    let populations: Vec<Vec<f64>> =
        traj.iter().map(|y| (0..n).map(|i| y[2 * i].powi(2) + y[2 * i + 1].powi(2)).collect()).collect();
    let max_intermediate = populations.iter().map(|p| p[0]).fold(0.0, f64::max);
    let last = traj.last().expect("at least two samples");
    let amplitudes: Vec<C64> = (0..n).map(|i| C64::new(last[2 * i], last[2 * i + 1])).collect();
    Ok(TransferOutcome {
        efficiency: amplitudes[target].norm_sqr(),
        scattered: last[2 * n],
        amplitudes,
        labels: to_labels(labels),
        max_intermediate,
        times,
        populations,
    })
}

/// Zeeman superposition (|m=−1⟩ − e^{iχ}|m=+1⟩)/√2.
pub fn zeeman_superposition(chi: f64) -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState { amplitudes: vec![C64::new(s, 0.0), -cis(chi) * s], labels: to_labels(&ZEEMAN_LABELS) }
}

/// State left in F=1 by a pump linearly polarized at angle α: (|−1⟩ + e^{2iα}|+1⟩)/√2.
pub fn readout_dark_state(alpha_pol: f64) -> PureState {
    zeeman_superposition(2.0 * alpha_pol + PI)
}

/// Relative σ± phase φ₁ of a tripod pump linearly polarized at angle α.
pub fn pump_phase_for_polarization(alpha_pol: f64) -> f64 {
    (2.0 * alpha_pol + PI).rem_euclid(2.0 * PI)
}

/// Probability that the prepared superposition with phase χ stays in F=1: sin²(α − χ/2).
pub fn stirap_readout_probability(prep_phase: f64, alpha_pol: f64) -> f64 {
    (alpha_pol - 0.5 * prep_phase).sin().powi(2)
}

/// Readout law with fringe visibility `v`: ½(1 − v cos(2α − χ)).
pub fn stirap_readout_with_visibility(prep_phase: f64, alpha_pol: f64, v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid("visibility", format!("must lie in [0, 1], got {v}")));
    }
    Ok(0.5 * (1.0 - v * (2.0 * alpha_pol - prep_phase).cos()))
}

/// Larmor angular frequency ω_L = μ_B g_F |B| / ħ (signed by g_F).
pub fn larmor_frequency(b_z: f64, g_f: f64) -> f64 {
    MU_B * g_f * b_z.abs() / HBAR
}

/// Zeeman superposition after precessing for time `t` in a field `b_z`.
pub fn larmor_evolve(b_z: f64, g_f: f64, t: f64, initial_phase: f64) -> Result<PureState> {
    if !b_z.is_finite() || !g_f.is_finite() {
        return Err(invalid("b_z", "field and g-factor must be finite"));
    }
    ensure_nonneg("t", t)?;
    Ok(zeeman_superposition(initial_phase + 2.0 * larmor_frequency(b_z, g_f) * t))
}

/// |⟨S(0)|S(t)⟩|².
pub fn larmor_survival(b_z: f64, g_f: f64, t: f64) -> Result<f64> {
    let s0 = zeeman_superposition(0.0);
    Ok(s0.overlap(&larmor_evolve(b_z, g_f, t, 0.0)?).norm_sqr())
}
