use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_atomtrap"));
    c.env_remove("ATOMTRAP_LINES");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|s| s.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn list_is_stable_and_names_scenarios() {
    let a = run(&["list"]);
    let b = run(&["list"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let g2 = text.find("\ng2\t").expect("g2 listed");
    let magic = text.find("\nmagic\t").expect("magic listed");
    assert!(magic < g2);
    assert!(text.contains("delta_mhz [MHz]"));
}

#[test]
fn four_level_g2_overshoots_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g2.csv");
    let o = run(&[
        "g2", "--model", "four-level", "--delta-mhz", "-31", "--icl", "103", "--irl", "12", "--tau-max-ns", "100", "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["tau_ns", "g2"]);
    assert!(rows[0][1].abs() < 1e-9);
    let max = rows.iter().map(|r| r[1]).fold(f64::MIN, f64::max);
    assert!(max > 2.0, "max {max}");
}

#[test]
fn stirap_sweep_follows_sin_squared() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = run(&["stirap", "--alpha-deg", "0..180:5", "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out);
    assert_eq!(rows.len(), 37);
    for r in rows {
        let want = r[0].to_radians().sin().powi(2);
        assert!((r[1] - want).abs() < 1e-9, "alpha {} got {} want {want}", r[0], r[1]);
    }
}

#[test]
fn unit_suffix_in_value_is_rejected_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = run(&["trap", "--power-mw", "1mW", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("power_mw"));
}

#[test]
fn config_key_without_unit_gets_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"scenario":"trap","params":{"power":1.0}}"#).unwrap();
    let o = run(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report.contains("power_mw"), "{report}");
    assert!(report.contains("mW"));
}

#[test]
fn validate_reports_nothing_for_good_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"scenario":"pair-rate","params":{"eta":5e-4}}"#).unwrap();
    let o = run(&["validate", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
}

#[test]
fn validate_names_missing_and_out_of_range_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"scenario":"spectrum-fit","params":{"reference_csv":"r.csv"}}"#).unwrap();
    let o = run(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stdout).unwrap().contains("fluorescence_csv"));

    std::fs::write(&cfg, r#"{"scenario":"pair-rate","params":{"eta":1.5}}"#).unwrap();
    let o = run(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stdout).unwrap().contains("eta"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&["g2", "--delta-mhz", "-10", "--tau-max-ns", "50", "--metadata", "-o", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let ma: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("a.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(ma["scenario"], "g2");
    assert_eq!(ma["line_data_sha256"], atomtrap::lightshift::sha256_hex(atomtrap::lightshift::RB87_LINES_JSON.as_bytes()));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"scenario":"pair-rate","params":{"eta":1e-3}}"#).unwrap();
    let o = run(&["pair-rate", "--config", cfg.to_str().unwrap(), "--eta", "5e-4"]);
    assert!(o.status.success());
    let base = run(&["pair-rate"]);
    assert_eq!(o.stdout, base.stdout);

    std::fs::write(&cfg, r#"{"scenario":"trap","params":{}}"#).unwrap();
    let o = run(&["pair-rate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spectrum_fit_round_trip() {
    use atomtrap::analysis::{convolve_profiles, uniform_grid, SpectrumProfile};
    let dir = tempfile::tempdir().unwrap();
    let grid = uniform_grid(-6.0, 6.0, 1201);
    let reference = SpectrumProfile::lorentzian(&grid, 0.0, 0.45).unwrap();
    let sigma_mhz = 0.2;
    let kernel = SpectrumProfile::gaussian(&grid, 0.0, sigma_mhz * (8.0 * 2f64.ln()).sqrt()).unwrap();
    let fluor = convolve_profiles(&reference, &kernel).unwrap();
    let write = |name: &str, p: &SpectrumProfile| {
        let path = dir.path().join(name);
        let mut s = String::from("freq_mhz,amp\n");
        for (f, a) in p.freq().iter().zip(p.amp()) {
            s.push_str(&format!("{f},{a}\n"));
        }
        std::fs::write(&path, s).unwrap();
        path
    };
    let r = write("ref.csv", &reference);
    let f = write("fl.csv", &fluor);
    let out = dir.path().join("fit.csv");
    let o = run(&[
        "spectrum-fit",
        "--reference-csv",
        r.to_str().unwrap(),
        "--fluorescence-csv",
        f.to_str().unwrap(),
        "--metadata",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("fit.csv.meta.json")).unwrap()).unwrap();
    let got = meta["summary"]["sigma_nu_khz"].as_f64().unwrap();
    assert!((got - 200.0).abs() < 4.0, "sigma {got} kHz");
}

#[test]
fn missing_input_file_is_io_error() {
    let o = run(&["validate", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(1));
}
