mod error;
mod params;
mod scenarios;

use std::io::Write;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};
use serde_json::json;

use error::CliError;
use params::{flag_name, raw_from_json, resolve, scenario, Kind, Params, RawConfig, SCENARIOS};
use scenarios::Table;

fn scenario_command(sc: &params::Scenario) -> Command {
    let mut cmd = Command::new(sc.name)
        .about(sc.about)
        .arg(Arg::new("config").long("config").short('c').value_name("FILE").help("JSON config; flags override its values"))
        .arg(Arg::new("output").long("output").short('o').value_name("FILE").help("CSV output path (stdout when absent)"))
        .arg(Arg::new("metadata").long("metadata").action(ArgAction::SetTrue).help("also write <output>.meta.json"));
    for k in sc.keys {
        let mut help = k.help.to_string();
        if !k.unit.is_empty() && k.unit != "path" {
            help.push_str(&format!(" [{}]", k.unit));
        }
        if let Kind::Choice(opts) = k.kind {
            help.push_str(&format!(" ({})", opts.join("|")));
        }
        if let Some(d) = k.default {
            help.push_str(&format!(" default {d}"));
        }
        let mut arg = Arg::new(k.name).long(flag_name(k.name)).value_name(k.unit.to_uppercase()).allow_hyphen_values(true).help(help);
        for a in k.aliases {
            arg = arg.alias(flag_name(a));
        }
        cmd = cmd.arg(arg);
    }
    cmd
}

fn cli() -> Command {
    let mut cmd = Command::new("atomtrap")
        .about("Single-atom trap, photon-correlation and entanglement models for 87Rb")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .subcommand(Command::new("list").about("List scenarios and their keys"))
        .subcommand(
            Command::new("validate")
                .about("Check a JSON config without running it")
                .arg(Arg::new("config").required(true).value_name("FILE")),
        )
        .subcommand(
            Command::new("run")
                .about("Run the scenario named in a JSON config")
                .arg(Arg::new("config").required(true).value_name("FILE"))
                .arg(Arg::new("output").long("output").short('o').value_name("FILE"))
                .arg(Arg::new("metadata").long("metadata").action(ArgAction::SetTrue))
                .arg(Arg::new("set").long("set").value_name("KEY=VALUE").action(ArgAction::Append).allow_hyphen_values(true)),
        );
    for sc in SCENARIOS {
        cmd = cmd.subcommand(scenario_command(sc));
    }
    cmd
}

fn list_scenarios() -> String {
    let mut s = String::new();
    for sc in SCENARIOS {
        s.push_str(&format!("{}\t{}\n", sc.name, sc.about));
        for k in sc.keys {
            let unit = if k.unit.is_empty() { String::new() } else { format!(" [{}]", k.unit) };
            let req = if k.default.is_none() { " (required)" } else { "" };
            s.push_str(&format!("  {}{unit}{req}\n", k.name));
        }
    }
    s
}

fn read_config(path: &str) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    raw_from_json(&text)
}

/// Dry-run validation of a config; returns the list of problems.
fn validate(raw: &RawConfig) -> Vec<String> {
    let Some(name) = raw.scenario.as_deref() else {
        return vec!["missing `scenario`".into()];
    };
    let Some(sc) = scenario(name) else {
        let names: Vec<&str> = SCENARIOS.iter().map(|s| s.name).collect();
        return vec![format!("unknown scenario `{name}`, expected one of {}", names.join(", "))];
    };
    let mut report = match resolve(sc, &raw.params) {
        Ok(_) => Vec::new(),
        Err(e) => e,
    };
    if raw.metadata && raw.output.is_none() {
        report.push("`metadata` needs an `output` path".into());
    }
    report
}

fn write_csv(table: &Table, out: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&table.header).map_err(io)?;
    for r in &table.rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

fn metadata(name: &str, params: &Params, table: &Table) -> serde_json::Value {
    let ode = atomtrap::ode::OdeOptions::default();
    let (lines_source, lines_bytes) = match std::env::var(atomtrap::lightshift::LINES_ENV) {
        Ok(p) => {
            let bytes = std::fs::read(&p).unwrap_or_default();
            (p, bytes)
        }
        Err(_) => ("built-in".to_string(), atomtrap::lightshift::RB87_LINES_JSON.as_bytes().to_vec()),
    };
    json!({
        "scenario": name,
        "library_version": env!("CARGO_PKG_VERSION"),
        "parameters": params,
        "summary": table.summary,
        "tolerances": { "ode_rtol": ode.rtol, "ode_atol": ode.atol },
        "line_data": lines_source,
        "line_data_sha256": atomtrap::lightshift::sha256_hex(&lines_bytes),
    })
}

fn execute(raw: RawConfig) -> Result<(), CliError> {
    let report = validate(&raw);
    if !report.is_empty() {
        return Err(CliError::Validation(report));
    }
    let name = raw.scenario.as_deref().expect("validated");
    let sc = scenario(name).expect("validated");
    let params = resolve(sc, &raw.params).map_err(CliError::Validation)?;
    let table = scenarios::run(name, &params)?;
    match &raw.output {
        Some(path) => {
            let mut buf = Vec::new();
            write_csv(&table, &mut buf)?;
            std::fs::write(path, buf).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            if raw.metadata {
                let meta = serde_json::to_string_pretty(&metadata(name, &params, &table)).expect("metadata serializes");
                let mpath = format!("{path}.meta.json");
                std::fs::write(&mpath, meta + "\n").map_err(|e| CliError::Io(format!("{mpath}: {e}")))?;
            }
            for (k, v) in &table.summary {
                println!("{k}={v}");
            }
        }
        None => {
            let stdout = std::io::stdout();
            write_csv(&table, &mut stdout.lock())?;
            for (k, v) in &table.summary {
                eprintln!("{k}={v}");
            }
        }
    }
    Ok(())
}

fn from_scenario_flags(sc: &params::Scenario, m: &ArgMatches) -> Result<RawConfig, CliError> {
    let mut raw = match m.get_one::<String>("config") {
        Some(path) => read_config(path)?,
        None => RawConfig::default(),
    };
    if let Some(s) = &raw.scenario {
        if s != sc.name {
            return Err(CliError::Validation(vec![format!("config is for scenario `{s}`, not `{}`", sc.name)]));
        }
    }
    raw.scenario = Some(sc.name.to_string());
    for k in sc.keys {
        if let Some(v) = m.get_one::<String>(k.name) {
            raw.params.retain(|(n, _)| params::canonical(sc, n).map(|c| c.name) != Some(k.name));
            raw.params.push((k.name.to_string(), v.clone()));
        }
    }
    if let Some(o) = m.get_one::<String>("output") {
        raw.output = Some(o.clone());
    }
    raw.metadata |= m.get_flag("metadata");
    Ok(raw)
}

fn dispatch(m: &ArgMatches) -> Result<(), CliError> {
    match m.subcommand() {
        Some(("list", _)) => {
            print!("{}", list_scenarios());
            Ok(())
        }
        Some(("validate", sub)) => {
            let raw = read_config(sub.get_one::<String>("config").expect("required"))?;
            let report = validate(&raw);
            if report.is_empty() {
                Ok(())
            } else {
                for line in &report {
                    println!("{line}");
                }
                Err(CliError::Validation(report))
            }
        }
        Some(("run", sub)) => {
            let mut raw = read_config(sub.get_one::<String>("config").expect("required"))?;
            let mut bad = Vec::new();
            for kv in sub.get_many::<String>("set").into_iter().flatten() {
                match kv.split_once('=') {
                    Some((k, v)) => {
                        let canon = raw
                            .scenario
                            .as_deref()
                            .and_then(scenario)
                            .and_then(|sc| params::canonical(sc, k))
                            .map(|c| c.name.to_string());
                        raw.params.retain(|(n, _)| n != k && Some(n) != canon.as_ref());
                        raw.params.push((k.to_string(), v.to_string()));
                    }
                    None => bad.push(format!("--set `{kv}` is not KEY=VALUE")),
                }
            }
            if !bad.is_empty() {
                return Err(CliError::Validation(bad));
            }
            if let Some(o) = sub.get_one::<String>("output") {
                raw.output = Some(o.clone());
            }
            raw.metadata |= sub.get_flag("metadata");
            execute(raw)
        }
        Some((name, sub)) => {
            let sc = scenario(name).expect("subcommands mirror the scenario table");
            execute(from_scenario_flags(sc, sub)?)
        }
        None => unreachable!("a subcommand is required"),
    }
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    match dispatch(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
