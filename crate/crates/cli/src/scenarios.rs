//! Scenario runners: resolved parameters in lab units to result tables.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use atomtrap::analysis::{fit_doppler_sigma, kinetic_energy_from_sigma, SpectrumProfile};
use atomtrap::bloch::{apply_trap_shifts, four_level_g2, two_level_g2_analytic, two_level_obe_g2, FourLevelParams, TwoLevelParams};
use atomtrap::coherent::{larmor_frequency, larmor_survival, stirap_readout_probability, stirap_readout_with_visibility};
use atomtrap::constants::{KB, RB87_D2_LAMBDA, RB87_D2_LINEWIDTH_HZ, RB87_MASS};
use atomtrap::entanglement::{
    bell_state, chsh, chsh_optimal, correlation_curve, fidelity, noisy_channel, noisy_violation_threshold, pair_rate_estimate,
    AnalysisBasis, BellLabel, MeasurementSetting,
};
use atomtrap::lightshift::{
    find_magic_wavelength, ground_shift_alkali, mean_level_shift, scattering_rate_alkali, LineTable, GROUND, P32,
};
use atomtrap::loading::{poisson, stationary_distribution, LoadingParams};
use atomtrap::trapgeometry::{
    doppler_temperature, harmonic_frequencies, heating_rate, recoil_temperature, trap_volume, GaussianBeam, TrapSpec,
};

use crate::error::CliError;
use crate::params::Params;

/// Tabular result plus scalar summary values for the metadata sidecar.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: BTreeMap<String, f64>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), ..Default::default() }
    }

    fn push(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|v| v.to_string()).collect());
    }

    fn push_named(&mut self, name: &str, value: f64, unit: &str) {
        self.rows.push(vec![name.to_string(), value.to_string(), unit.to_string()]);
        self.summary.insert(name.to_string(), value);
    }
}

fn lines() -> Result<LineTable, CliError> {
    Ok(LineTable::from_env()?)
}

const MHZ: f64 = 2.0 * PI * 1e6;

pub fn run(name: &str, p: &Params) -> Result<Table, CliError> {
    match name {
        "lightshift" => lightshift(p),
        "magic" => magic(p),
        "trap" => trap(p),
        "loading" => loading(p),
        "g2" => g2(p),
        "stirap" => stirap(p),
        "larmor" => larmor(p),
        "bell" => bell(p),
        "correlations" => correlations(p),
        "spectrum-fit" => spectrum_fit(p),
        "pair-rate" => pair_rate(p),
        other => Err(CliError::Validation(vec![format!("unknown scenario `{other}`")])),
    }
}

fn lightshift(p: &Params) -> Result<Table, CliError> {
    let lines = lines()?;
    let mut t = Table::new(&["wavelength_nm", "potential_mk", "scattering_rate_per_s", "ground_shift_mhz", "p32_shift_mhz"]);
    for &nm in p.list("wavelength_nm") {
        let beam = GaussianBeam::new(p.num("power_mw") * 1e-3, p.num("waist_um") * 1e-6, nm * 1e-9)?;
        let field = beam.focus_field()?;
        let u = ground_shift_alkali(&field, 1, &lines)?;
        let rate = scattering_rate_alkali(&field, &lines)?;
        let g = mean_level_shift(GROUND, &field, &lines)? / MHZ;
        let e = mean_level_shift(P32, &field, &lines)? / MHZ;
        t.push(&[nm, u / KB * 1e3, rate, g, e]);
    }
    Ok(t)
}

fn magic(p: &Params) -> Result<Table, CliError> {
    let l = find_magic_wavelength(&lines()?, [p.num("lo_um") * 1e-6, p.num("hi_um") * 1e-6])?;
    let mut t = Table::new(&["quantity", "value", "unit"]);
    t.push_named("magic_wavelength", l * 1e6, "um");
    Ok(t)
}

fn trap(p: &Params) -> Result<Table, CliError> {
    let lines = lines()?;
    let beam = GaussianBeam::new(p.num("power_mw") * 1e-3, p.num("waist_um") * 1e-6, p.num("wavelength_nm") * 1e-9)?;
    let spec = TrapSpec::from_beam(&beam, &lines, RB87_MASS)?;
    let (wr, wz) = harmonic_frequencies(&spec);
    let rate = scattering_rate_alkali(&beam.focus_field()?, &lines)?;
    let t_rec = recoil_temperature(RB87_D2_LAMBDA, RB87_MASS)?;
    let volume = trap_volume(&spec, p.num("temperature_uk") * 1e-6)?;
    let mut t = Table::new(&["quantity", "value", "unit"]);
    t.push_named("depth", spec.depth_u / KB * 1e3, "mK");
    t.push_named("scattering_rate", rate, "1/s");
    t.push_named("radial_frequency", wr / (2.0 * PI) / 1e3, "kHz");
    t.push_named("axial_frequency", wz / (2.0 * PI) / 1e3, "kHz");
    t.push_named("rayleigh_length", spec.z_r * 1e6, "um");
    t.push_named("doppler_temperature", doppler_temperature(2.0 * PI * RB87_D2_LINEWIDTH_HZ)? * 1e6, "uK");
    t.push_named("recoil_temperature", t_rec * 1e9, "nK");
    t.push_named("heating_rate", heating_rate(t_rec, rate, 1.0)? * 1e6, "uK/s");
    t.push_named("trap_volume", volume * 1e18, "um3");
    Ok(t)
}

fn loading(p: &Params) -> Result<Table, CliError> {
    let spec = TrapSpec::new(p.num("depth_mk") * 1e-3 * KB, p.num("waist_um") * 1e-6, p.num("wavelength_nm") * 1e-9, RB87_MASS)?;
    let volume = trap_volume(&spec, p.num("temperature_uk") * 1e-6)?;
    let n_max = p.int("n_max") as usize;
    let lp = LoadingParams::new(p.num("rate_per_s"), p.num("gamma_per_s"), p.num("beta_cm3_per_s") * 1e-6, volume, n_max)?;
    let dist = stationary_distribution(&lp)?;
    let gamma = p.num("gamma_per_s");
    let mut t = if gamma > 0.0 { Table::new(&["n", "probability", "poisson"]) } else { Table::new(&["n", "probability"]) };
    let pois = if gamma > 0.0 { poisson(p.num("rate_per_s") / gamma, n_max) } else { Vec::new() };
    for (n, &pn) in dist.p.iter().enumerate() {
        if gamma > 0.0 {
            t.push(&[n as f64, pn, pois[n]]);
        } else {
            t.push(&[n as f64, pn]);
        }
    }
    t.summary.insert("p_two_or_more".into(), dist.tail(2));
    t.summary.insert("trap_volume_um3".into(), volume * 1e18);
    Ok(t)
}

fn tau_grid(p: &Params) -> Result<Vec<f64>, CliError> {
    let (max, step) = (p.num("tau_max_ns"), p.num("tau_step_ns"));
    let n = (max / step + 1e-9).floor() as usize;
    if n > 2_000_000 {
        return Err(CliError::Validation(vec!["`tau_max_ns`/`tau_step_ns` gives more than two million delays".into()]));
    }
    Ok((0..=n).map(|k| k as f64 * step * 1e-9).collect())
}

fn g2(p: &Params) -> Result<Table, CliError> {
    let tau = tau_grid(p)?;
    let delta = p.num("delta_mhz") * MHZ;
    match p.text("model") {
        "two-level" => {
            let (o, g) = (p.num("rabi_mhz") * MHZ, p.num("gamma_mhz") * MHZ);
            let params = TwoLevelParams::new(o, delta, g)?;
            let num = two_level_obe_g2(&params, &tau)?;
            let ana = two_level_g2_analytic(o, delta, g, &tau);
            let mut t = Table::new(&["tau_ns", "g2", "g2_closed_form"]);
            for ((x, a), b) in tau.iter().zip(&num).zip(&ana) {
                t.push(&[x * 1e9, *a, *b]);
            }
            t.summary.insert("g2_max".into(), num.iter().copied().fold(0.0, f64::max));
            Ok(t)
        }
        _ => {
            let mut params = FourLevelParams::new(p.num("icl_mw_cm2"), p.num("irl_mw_cm2"), delta);
            if p.num("trap_power_mw") > 0.0 {
                let beam = GaussianBeam::new(
                    p.num("trap_power_mw") * 1e-3,
                    p.num("trap_waist_um") * 1e-6,
                    p.num("trap_wavelength_nm") * 1e-9,
                )?;
                params = apply_trap_shifts(&params, &beam.focus_field()?, p.num("temperature_uk") * 1e-6, &lines()?)?;
            }
            let g = four_level_g2(&params, &tau)?;
            let mut t = Table::new(&["tau_ns", "g2"]);
            for (x, v) in tau.iter().zip(&g) {
                t.push(&[x * 1e9, *v]);
            }
            t.summary.insert("g2_max".into(), g.iter().copied().fold(0.0, f64::max));
            Ok(t)
        }
    }
}

fn stirap(p: &Params) -> Result<Table, CliError> {
    let chi = p.num("chi_deg").to_radians();
    let v = p.num("visibility");
    let mut t = Table::new(&["alpha_deg", "probability", "ideal"]);
    for &a in p.list("alpha_deg") {
        let r = a.to_radians();
        t.push(&[a, stirap_readout_with_visibility(chi, r, v)?, stirap_readout_probability(chi, r)]);
    }
    Ok(t)
}

fn larmor(p: &Params) -> Result<Table, CliError> {
    let b = p.num("b_mg") * 1e-7;
    let g = p.num("g_f");
    let mut t = Table::new(&["t_us", "survival"]);
    for &us in p.list("t_us") {
        t.push(&[us, larmor_survival(b, g, us * 1e-6)?]);
    }
    t.summary.insert("larmor_frequency_khz".into(), larmor_frequency(b, g) / (2.0 * PI) / 1e3);
    Ok(t)
}

fn bell(p: &Params) -> Result<Table, CliError> {
    let label = match p.text("state") {
        "psi+" => BellLabel::PsiPlus,
        "phi+" => BellLabel::PhiPlus,
        "phi-" => BellLabel::PhiMinus,
        _ => BellLabel::PsiMinus,
    };
    let target = bell_state(label);
    let rho = noisy_channel(&target, p.num("p"))?;
    let e = MeasurementSetting::Equatorial;
    let mut t = Table::new(&["quantity", "value", "unit"]);
    t.push_named("chsh_optimal", chsh_optimal(&rho), "");
    t.push_named("chsh_canonical", chsh(&rho, e(0.0), e(PI / 2.0), e(PI / 4.0), e(3.0 * PI / 4.0))?, "");
    t.push_named("fidelity", fidelity(&rho, &target)?, "");
    let th = noisy_violation_threshold(&target)?;
    t.push_named("violation_threshold_p", th, "");
    t.push_named("violation_threshold_fidelity", (3.0 * th + 1.0) / 4.0, "");
    Ok(t)
}

fn correlations(p: &Params) -> Result<Table, CliError> {
    let basis = if p.text("basis") == "y" { AnalysisBasis::Y } else { AnalysisBasis::X };
    let betas = p.list("beta_deg");
    let rad: Vec<f64> = betas.iter().map(|b| b.to_radians()).collect();
    let curve = correlation_curve(basis, &rad, p.num("visibility"))?;
    let mut t = Table::new(&["beta_deg", "probability"]);
    for (b, v) in betas.iter().zip(curve) {
        t.push(&[*b, v]);
    }
    Ok(t)
}

fn read_profile(path: &str, key: &str) -> Result<SpectrumProfile, CliError> {
    let bad = |m: String| CliError::Validation(vec![format!("`{key}` ({path}): {m}")]);
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(Path::new(path))
        .map_err(|e| bad(e.to_string()))?;
    let (mut f, mut a) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() < 2 {
            return Err(bad(format!("row {} has fewer than two columns", i + 1)));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                f.push(x * 1e6);
                a.push(y);
            }
            _ if i == 0 => continue,
            _ => return Err(bad(format!("row {} is not numeric", i + 1))),
        }
    }
    SpectrumProfile::new(f, a).map_err(|e| bad(e.to_string()))
}

fn spectrum_fit(p: &Params) -> Result<Table, CliError> {
    let reference = read_profile(p.text("reference_csv"), "reference_csv")?;
    let fluor = read_profile(p.text("fluorescence_csv"), "fluorescence_csv")?;
    let fit = fit_doppler_sigma(&reference, &fluor)?;
    let lambda = p.num("wavelength_nm") * 1e-9;
    let e = kinetic_energy_from_sigma(fit.sigma_nu, lambda, RB87_MASS)?;
    let mut t = Table::new(&["freq_mhz", "data", "model", "residual"]);
    for ((f, d), r) in fluor.freq().iter().zip(fluor.amp()).zip(&fit.residuals) {
        t.push(&[f / 1e6, *d, d - r, *r]);
    }
    t.summary.insert("sigma_nu_khz".into(), fit.sigma_nu / 1e3);
    t.summary.insert("sigma_nu_stderr_khz".into(), fit.stderr / 1e3);
    t.summary.insert("e_kin_uk".into(), e * 1e6);
    let de = if fit.sigma_nu > 0.0 { 2.0 * e * fit.stderr / fit.sigma_nu } else { 0.0 };
    t.summary.insert("e_kin_stderr_uk".into(), de * 1e6);
    t.summary.insert("residual_norm".into(), fit.residual_norm);
    Ok(t)
}

fn pair_rate(p: &Params) -> Result<Table, CliError> {
    let r = pair_rate_estimate(p.num("eta"), p.num("t_fiber"), p.num("cycle_us") * 1e-6, p.num("multiplier"))?;
    let mut t = Table::new(&["quantity", "value", "unit"]);
    t.push_named("pairs_per_minute", r, "1/min");
    t.push_named("success_per_attempt", 0.25 * (p.num("eta") * p.num("t_fiber")).powi(2), "");
    Ok(t)
}
