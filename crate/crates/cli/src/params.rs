//! Scenario parameter schemas, value parsing and validation.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value as Json;

use crate::error::CliError;

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Num { min: f64, max: f64 },
    Int { min: u64, max: u64 },
    /// Single value, `a,b,c` list or inclusive `lo..hi:step` range.
    Sweep,
    Choice(&'static [&'static str]),
    Path,
}

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub unit: &'static str,
    pub kind: Kind,
    pub default: Option<&'static str>,
    pub aliases: &'static [&'static str],
    pub help: &'static str,
}

const ANY: Kind = Kind::Num { min: f64::NEG_INFINITY, max: f64::INFINITY };
const POS: Kind = Kind::Num { min: f64::MIN_POSITIVE, max: f64::INFINITY };
const NONNEG: Kind = Kind::Num { min: 0.0, max: f64::INFINITY };
const UNIT: Kind = Kind::Num { min: 0.0, max: 1.0 };

const fn key(name: &'static str, unit: &'static str, kind: Kind, default: Option<&'static str>, help: &'static str) -> Key {
    Key { name, unit, kind, default, aliases: &[], help }
}

const fn alias(k: Key, aliases: &'static [&'static str]) -> Key {
    Key { aliases, ..k }
}

#[derive(Debug, Clone, Copy)]
pub struct Scenario {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
}

pub const SCENARIOS: &[Scenario] = &[
    Scenario {
        name: "lightshift",
        about: "Ground-state trap depth, scattering rate and level shifts versus trap wavelength",
        keys: &[
            key("wavelength_nm", "nm", Kind::Sweep, Some("856"), "trap wavelength(s)"),
            key("power_mw", "mW", POS, Some("44"), "beam power"),
            key("waist_um", "μm", POS, Some("3.5"), "beam waist w0"),
        ],
    },
    Scenario {
        name: "magic",
        about: "Wavelength where 5S1/2 and the mean 5P3/2 shift coincide",
        keys: &[
            key("lo_um", "μm", POS, Some("1.2"), "lower end of the search bracket"),
            key("hi_um", "μm", POS, Some("1.6"), "upper end of the search bracket"),
        ],
    },
    Scenario {
        name: "trap",
        about: "Gaussian-beam trap: depth, frequencies, characteristic temperatures, heating, volume",
        keys: &[
            key("power_mw", "mW", POS, Some("44"), "beam power"),
            key("waist_um", "μm", POS, Some("3.5"), "beam waist w0"),
            key("wavelength_nm", "nm", POS, Some("856"), "trap wavelength"),
            key("temperature_uk", "μK", NONNEG, Some("100"), "atom temperature for the trap volume"),
        ],
    },
    Scenario {
        name: "loading",
        about: "Stationary atom-number distribution with light-assisted pair loss",
        keys: &[
            key("rate_per_s", "1/s", NONNEG, Some("1"), "loading rate R"),
            key("gamma_per_s", "1/s", NONNEG, Some("0.2"), "one-body loss rate"),
            key("beta_cm3_per_s", "cm³/s", NONNEG, Some("5e-10"), "two-body loss coefficient"),
            key("depth_mk", "mK", POS, Some("1"), "trap depth"),
            key("waist_um", "μm", POS, Some("3.5"), "beam waist w0"),
            key("wavelength_nm", "nm", POS, Some("856"), "trap wavelength"),
            key("temperature_uk", "μK", NONNEG, Some("100"), "atom temperature"),
            key("n_max", "atoms", Kind::Int { min: 1, max: 2000 }, Some("40"), "truncation of the atom number"),
        ],
    },
    Scenario {
        name: "g2",
        about: "Second-order correlation g²(τ) of the fluorescence",
        keys: &[
            key("model", "", Kind::Choice(&["two-level", "four-level"]), Some("four-level"), "atomic model"),
            key("delta_mhz", "MHz", ANY, Some("-31"), "detuning Δ/2π (cooling laser for four-level)"),
            alias(key("icl_mw_cm2", "mW/cm²", NONNEG, Some("103"), "cooling intensity (four-level)"), &["icl"]),
            alias(key("irl_mw_cm2", "mW/cm²", NONNEG, Some("12"), "repump intensity (four-level)"), &["irl"]),
            key("rabi_mhz", "MHz", NONNEG, Some("30"), "Rabi frequency Ω0/2π (two-level)"),
            key("gamma_mhz", "MHz", POS, Some("6.065"), "linewidth Γ/2π (two-level)"),
            key("trap_power_mw", "mW", NONNEG, Some("0"), "dipole-trap power adding light shifts (four-level)"),
            key("trap_waist_um", "μm", POS, Some("3.5"), "dipole-trap waist"),
            key("trap_wavelength_nm", "nm", POS, Some("856"), "dipole-trap wavelength"),
            key("temperature_uk", "μK", NONNEG, Some("100"), "kinetic temperature reducing the mean shift"),
            key("tau_max_ns", "ns", POS, Some("300"), "largest delay"),
            key("tau_step_ns", "ns", POS, Some("0.5"), "delay step"),
        ],
    },
    Scenario {
        name: "stirap",
        about: "Tripod STIRAP readout probability versus analyzer polarization angle",
        keys: &[
            key("alpha_deg", "deg", Kind::Sweep, Some("0..180:5"), "readout polarization angle(s)"),
            key("chi_deg", "deg", ANY, Some("0"), "relative phase of the prepared Zeeman superposition"),
            key("visibility", "", UNIT, Some("1"), "fringe visibility"),
        ],
    },
    Scenario {
        name: "larmor",
        about: "Dark-state survival under Larmor precession in a bias field",
        keys: &[
            key("b_mg", "mG", ANY, Some("132"), "magnetic field along the quantization axis"),
            key("g_f", "", ANY, Some("-0.5"), "hyperfine Landé factor"),
            key("t_us", "μs", Kind::Sweep, Some("0..10:0.05"), "precession time(s)"),
        ],
    },
    Scenario {
        name: "bell",
        about: "CHSH value and fidelities of a Bell state mixed with white noise",
        keys: &[
            key("state", "", Kind::Choice(&["psi-", "psi+", "phi+", "phi-"]), Some("psi-"), "target Bell state"),
            key("p", "", UNIT, Some("1"), "weight of the pure state in the white-noise mixture"),
        ],
    },
    Scenario {
        name: "correlations",
        about: "Atom-photon correlation curve in the x or y analysis basis",
        keys: &[
            key("basis", "", Kind::Choice(&["x", "y"]), Some("x"), "atomic analysis basis"),
            key("visibility", "", UNIT, Some("0.81"), "fringe visibility"),
            key("beta_deg", "deg", Kind::Sweep, Some("0..180:5"), "photon analyzer angle(s)"),
        ],
    },
    Scenario {
        name: "spectrum-fit",
        about: "Doppler width and kinetic energy from reference and fluorescence spectra",
        keys: &[
            key("reference_csv", "path", Kind::Path, None, "two-column CSV: frequency_mhz, amplitude"),
            key("fluorescence_csv", "path", Kind::Path, None, "two-column CSV: frequency_mhz, amplitude"),
            key("wavelength_nm", "nm", POS, Some("780.246"), "observed transition wavelength"),
        ],
    },
    Scenario {
        name: "pair-rate",
        about: "Heralded atom-atom pair rate estimate",
        keys: &[
            key("eta", "", UNIT, Some("5e-4"), "single-photon detection efficiency"),
            key("t_fiber", "", UNIT, Some("0.9746794344808963"), "fiber transmission"),
            key("cycle_us", "μs", POS, Some("1"), "duration of one attempt"),
            key("multiplier", "", NONNEG, Some("1"), "duty-cycle multiplier"),
        ],
    },
];

pub fn scenario(name: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name)
}

pub fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Int(u64),
    List(Vec<f64>),
    Text(String),
}

/// Fully resolved parameters, keyed by canonical name.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Params(pub BTreeMap<String, Value>);

impl Params {
    pub fn num(&self, k: &str) -> f64 {
        match self.0.get(k) {
            Some(Value::Num(v)) => *v,
            other => panic!("parameter {k} is not a number: {other:?}"),
        }
    }

    pub fn int(&self, k: &str) -> u64 {
        match self.0.get(k) {
            Some(Value::Int(v)) => *v,
            other => panic!("parameter {k} is not an integer: {other:?}"),
        }
    }

    pub fn list(&self, k: &str) -> &[f64] {
        match self.0.get(k) {
            Some(Value::List(v)) => v,
            other => panic!("parameter {k} is not a list: {other:?}"),
        }
    }

    pub fn text(&self, k: &str) -> &str {
        match self.0.get(k) {
            Some(Value::Text(v)) => v,
            other => panic!("parameter {k} is not text: {other:?}"),
        }
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// `a`, `a,b,c` or `lo..hi:step` (inclusive of `hi` when it lies on the step grid).
pub fn parse_sweep(s: &str) -> Result<Vec<f64>, String> {
    if let Some((range, step)) = s.split_once(':') {
        let (lo, hi) = range.split_once("..").ok_or_else(|| format!("`{s}` is not of the form lo..hi:step"))?;
        let (lo, hi, step) = match (parse_f64(lo), parse_f64(hi), parse_f64(step)) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(format!("`{s}` is not of the form lo..hi:step")),
        };
        if !(step > 0.0) || hi < lo {
            return Err(format!("`{s}` needs step > 0 and hi >= lo"));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        if n > 1_000_000 {
            return Err(format!("`{s}` has more than a million points"));
        }
        return Ok((0..=n).map(|k| lo + k as f64 * step).collect());
    }
    s.split(',').map(|p| parse_f64(p).ok_or_else(|| format!("`{p}` is not a number"))).collect()
}

fn describe(k: &Key) -> String {
    if k.unit.is_empty() {
        format!("`{}`", k.name)
    } else {
        format!("`{}` (unit {})", k.name, k.unit)
    }
}

/// Parses one raw textual value against its schema entry.
pub fn parse_value(k: &Key, raw: &str) -> Result<Value, String> {
    match k.kind {
        Kind::Num { min, max } => {
            let v = parse_f64(raw).ok_or_else(|| format!("{}: `{raw}` is not a finite number", describe(k)))?;
            if v < min || v > max {
                let range = match (min.is_finite(), max.is_finite()) {
                    (true, true) => format!("[{min}, {max}]"),
                    (true, false) if min > 0.0 => "> 0".to_string(),
                    (true, false) => format!(">= {min}"),
                    _ => format!("<= {max}"),
                };
                return Err(format!("{}: {v} is out of range, expected {range}", describe(k)));
            }
            Ok(Value::Num(v))
        }
        Kind::Int { min, max } => {
            let v: u64 = raw.trim().parse().map_err(|_| format!("{}: `{raw}` is not a non-negative integer", describe(k)))?;
            if v < min || v > max {
                return Err(format!("{}: {v} is out of range, expected [{min}, {max}]", describe(k)));
            }
            Ok(Value::Int(v))
        }
        Kind::Sweep => parse_sweep(raw).map(Value::List).map_err(|e| format!("{}: {e}", describe(k))),
        Kind::Choice(opts) => {
            if opts.contains(&raw) {
                Ok(Value::Text(raw.to_string()))
            } else {
                Err(format!("{}: `{raw}` is not one of {}", describe(k), opts.join(", ")))
            }
        }
        Kind::Path => {
            if raw.is_empty() {
                Err(format!("{}: empty path", describe(k)))
            } else {
                Ok(Value::Text(raw.to_string()))
            }
        }
    }
}

/// Canonical key for a config or flag name, accepting aliases and dashes.
pub fn canonical<'a>(sc: &'a Scenario, name: &str) -> Option<&'a Key> {
    let n = name.replace('-', "_");
    sc.keys.iter().find(|k| k.name == n || k.aliases.contains(&n.as_str()))
}

/// Suggests the expected key when only the unit suffix differs.
fn suggestion(sc: &Scenario, name: &str) -> String {
    let n = name.replace('-', "_");
    let stem = n.split('_').next().unwrap_or("");
    match sc.keys.iter().find(|k| k.name.split('_').next() == Some(stem)) {
        Some(k) => format!("; did you mean {}?", describe(k)),
        None => String::new(),
    }
}

/// Raw configuration: scenario, string-valued parameters and output settings.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub scenario: Option<String>,
    pub params: Vec<(String, String)>,
    pub output: Option<String>,
    pub metadata: bool,
}

fn json_to_text(v: &Json) -> Option<String> {
    match v {
        Json::Number(n) => Some(n.to_string()),
        Json::String(s) => Some(s.clone()),
        Json::Array(a) => a.iter().map(|x| x.as_f64().map(|f| f.to_string())).collect::<Option<Vec<_>>>().map(|v| v.join(",")),
        _ => None,
    }
}

/// Reads a JSON config: `{"scenario": ..., "params": {...}, "output": ..., "metadata": bool}`.
pub fn raw_from_json(text: &str) -> Result<RawConfig, CliError> {
    let v: Json = serde_json::from_str(text).map_err(|e| CliError::Validation(vec![format!("config is not valid JSON: {e}")]))?;
    let obj = v.as_object().ok_or_else(|| CliError::Validation(vec!["config must be a JSON object".into()]))?;
    let mut errors = Vec::new();
    let mut raw = RawConfig::default();
    for (k, val) in obj {
        match k.as_str() {
            "scenario" => match val.as_str() {
                Some(s) => raw.scenario = Some(s.to_string()),
                None => errors.push("`scenario` must be a string".into()),
            },
            "output" => match val.as_str() {
                Some(s) => raw.output = Some(s.to_string()),
                None => errors.push("`output` must be a string path".into()),
            },
            "metadata" => match val.as_bool() {
                Some(b) => raw.metadata = b,
                None => errors.push("`metadata` must be true or false".into()),
            },
            "params" => match val.as_object() {
                Some(p) => {
                    for (pk, pv) in p {
                        match json_to_text(pv) {
                            Some(t) => raw.params.push((pk.clone(), t)),
                            None => errors.push(format!("`{pk}`: value must be a number, string or list of numbers")),
                        }
                    }
                }
                None => errors.push("`params` must be an object".into()),
            },
            other => errors.push(format!("unknown top-level key `{other}` (expected scenario, params, output, metadata)")),
        }
    }
    if errors.is_empty() {
        Ok(raw)
    } else {
        Err(CliError::Validation(errors))
    }
}

/// Resolves raw parameters against the schema; every problem is reported.
pub fn resolve(sc: &Scenario, raw: &[(String, String)]) -> Result<Params, Vec<String>> {
    let mut errors = Vec::new();
    let mut given: BTreeMap<&'static str, String> = BTreeMap::new();
    for (name, val) in raw {
        match canonical(sc, name) {
            Some(k) => {
                given.insert(k.name, val.clone());
            }
            None => errors.push(format!("unknown key `{name}` for scenario {}{}", sc.name, suggestion(sc, name))),
        }
    }
    let mut out = Params::default();
    for k in sc.keys {
        let raw = given.get(k.name).cloned().or_else(|| k.default.map(str::to_string));
        match raw {
            None => errors.push(format!("missing required key {}", describe(k))),
            Some(r) => match parse_value(k, &r) {
                Ok(v) => {
                    out.0.insert(k.name.to_string(), v);
                }
                Err(e) => errors.push(e),
            },
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}
