//! Command-line front end: flag and config-file parsing, command dispatch and
//! report writing.

use crate::acceptance::{run_all, AcceptanceConfig, CRITERIA};
use crate::error::{Error, Result};
use crate::graphs::{solve_radial, theorem_harness, StepControl};
use crate::identities::{applicable_checks, evaluate_checks, refined_checks, ABSOLUTE_TOLERANCE};
use crate::integral::{evaluate, refine_integral, Formula};
use crate::zoo::{instantiate, list_scenarios, Overrides};
use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Identities,
    Integral,
    SolveRadial,
    Harness,
    ZooList,
    Acceptance,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Identities => "identities",
            Command::Integral => "integral",
            Command::SolveRadial => "solve-radial",
            Command::Harness => "harness",
            Command::ZooList => "zoo-list",
            Command::Acceptance => "acceptance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Flags; each mirrors a config-file key and overrides it.
#[derive(Debug, Parser)]
#[command(name = "kgeom", version, about = "Hypersurface geometry checks in product spaces and space forms")]
pub struct Cli {
    /// Command to run; may instead come from the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Number of resolution doublings used for order estimates.
    #[arg(long)]
    pub refine: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    #[arg(long = "K", allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long = "x0-max")]
    pub x0_max: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub no_timestamp: bool,
    /// Comma-separated subset of acceptance criteria.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Option<Vec<u32>>,
}

/// Config file contents.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<Command>,
    pub scenario: Option<String>,
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub refine: Option<usize>,
    pub no_timestamp: Option<bool>,
    pub criteria: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub scenario: Option<String>,
    pub overrides: BTreeMap<String, f64>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub refine: usize,
    pub no_timestamp: bool,
    pub criteria: Vec<u32>,
}

impl RunConfig {
    /// Merge a config file (if any) with flags; flags win.
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                serde_json::from_str::<FileConfig>(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => FileConfig::default(),
        };
        let command = cli.command.or(file.command).ok_or_else(|| Error::Config("no command given".into()))?;
        let mut overrides = file.overrides;
        let flag_values = [
            ("resolution", cli.resolution.map(|r| r as f64)),
            ("epsilon", cli.epsilon),
            ("K", cli.k),
            ("x0_max", cli.x0_max),
            ("delta", cli.delta),
        ];
        for (key, v) in flag_values {
            if let Some(v) = v {
                overrides.insert(key.to_string(), v);
            }
        }
        let default_format = if command == Command::SolveRadial { Format::Csv } else { Format::Json };
        Ok(Self {
            command,
            scenario: cli.scenario.or(file.scenario),
            overrides,
            output_path: cli.out.or(file.output),
            format: cli.format.or(file.format).unwrap_or(default_format),
            refine: cli.refine.or(file.refine).unwrap_or(1),
            no_timestamp: cli.no_timestamp || file.no_timestamp.unwrap_or(false),
            criteria: cli.criteria.or(file.criteria).unwrap_or_else(|| CRITERIA.iter().map(|c| c.0).collect()),
        })
    }

    fn scenario_name(&self) -> Result<&str> {
        self.scenario.as_deref().ok_or_else(|| Error::Config(format!("`{}` requires --scenario", self.command.name())))
    }

    /// Overrides applicable to scenarios: everything except the radial
    /// solver's own keys.
    fn scenario_overrides(&self) -> Overrides {
        self.overrides
            .iter()
            .filter(|(k, _)| !matches!(k.as_str(), "epsilon" | "delta"))
            .map(|(k, v)| (k.clone(), *v))
            .collect()
    }
}

/// Output of one command before serialization.
pub struct Outcome {
    pub passed: bool,
    pub json: Value,
    /// Pre-rendered CSV when requested.
    pub csv: Option<String>,
    /// Lines for the error stream.
    pub notes: Vec<String>,
}

fn envelope(cfg: &RunConfig, body: Value) -> Value {
    let mut map = serde_json::Map::new();
    map.insert("schema".into(), json!(SCHEMA_VERSION));
    map.insert("command".into(), json!(cfg.command.name()));
    if !cfg.no_timestamp {
        let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        map.insert("generated_at_unix".into(), json!(secs));
    }
    if let Value::Object(b) = body {
        map.extend(b);
    }
    Value::Object(map)
}

fn cmd_identities(cfg: &RunConfig) -> Result<Outcome> {
    let name = cfg.scenario_name()?;
    let inst = instantiate(name, &cfg.scenario_overrides())?;
    let kinds = applicable_checks(&inst.surface);
    let checks = if cfg.refine == 0 {
        let mut c = evaluate_checks(&inst.surface, &inst.grid, &kinds)?;
        for check in &mut c {
            check.passed = check.max_residual <= ABSOLUTE_TOLERANCE;
        }
        c
    } else {
        refined_checks(&inst.surface, inst.resolution, cfg.refine, &kinds)?
    };
    let expected = inst.verify_expected()?;
    let passed = checks.iter().all(|c| c.passed) && expected.iter().all(|e| e.passed);
    let notes = checks
        .iter()
        .map(|c| {
            format!(
                "{:16} residual {:.3e} order {:?} {}",
                c.name,
                c.max_residual,
                c.order,
                if c.passed { "ok" } else { "FAILED" }
            )
        })
        .collect();
    Ok(Outcome {
        passed,
        json: json!({
            "scenario": name, "params": inst.params, "resolution": inst.resolution, "refine": cfg.refine,
            "tolerances": inst.tolerances, "checks": checks, "expected": expected, "passed": passed,
        }),
        csv: None,
        notes,
    })
}

fn cmd_integral(cfg: &RunConfig) -> Result<Outcome> {
    let name = cfg.scenario_name()?;
    let inst = instantiate(name, &cfg.scenario_overrides())?;
    let mut formulas = vec![Formula::General];
    if inst.surface.ambient.base().is_some() {
        formulas.push(Formula::Product);
    }
    if inst.surface.ambient.is_einstein() && inst.surface.ambient.killing().is_some_and(|k| k.phi == 0.0) {
        formulas.push(Formula::Einstein);
    }
    let mut reports = Vec::new();
    let mut passed = true;
    let mut notes = Vec::new();
    for f in formulas {
        let r = evaluate(&inst.surface, &inst.grid, f)?;
        let refinement = if cfg.refine > 0 {
            let res: Vec<usize> = (0..=cfg.refine).map(|k| inst.resolution << k).collect();
            Some(refine_integral(&inst.surface, f, &res, 1.5)?)
        } else {
            None
        };
        let ok = r.relative_residual <= 1e-6 && refinement.as_ref().is_none_or(|x| x.passed);
        passed &= ok;
        notes.push(format!(
            "{:18} lhs {:.12e} rhs {:.12e} relative {:.3e} {}",
            r.formula,
            r.lhs,
            r.rhs,
            r.relative_residual,
            if ok { "ok" } else { "FAILED" }
        ));
        reports.push(json!({ "report": r, "refinement": refinement, "passed": ok }));
    }
    Ok(Outcome {
        passed,
        json: json!({ "scenario": name, "params": inst.params, "resolution": inst.resolution, "integrals": reports, "passed": passed }),
        csv: None,
        notes,
    })
}

fn cmd_solve_radial(cfg: &RunConfig) -> Result<Outcome> {
    let get = |k: &str, d: Option<f64>| {
        cfg.overrides
            .get(k)
            .copied()
            .or(d)
            .ok_or_else(|| Error::Config(format!("solve-radial requires --{}", k.replace('_', "-"))))
    };
    let eps = get("epsilon", None)?;
    let k = get("K", None)?;
    let x0_max = get("x0_max", Some(10.0))?;
    let delta = get("delta", Some(1e-6))?;
    let sol = solve_radial(eps, k, x0_max, delta, StepControl::default())?;
    let err = sol.max_closed_form_error(2.0_f64.min(x0_max))?;
    let spacelike = sol.is_spacelike();
    let passed = err <= 1e-6 && spacelike;
    let csv = if cfg.format == Format::Csv {
        let mut buf = Vec::new();
        sol.write_csv(&mut buf)?;
        Some(String::from_utf8(buf).expect("csv is utf-8"))
    } else {
        None
    };
    Ok(Outcome {
        passed,
        json: json!({
            "epsilon": eps, "K": k, "x0_max": x0_max, "delta": delta, "max_closed_form_error": err,
            "spacelike": spacelike, "stats": sol.stats, "samples": sol.samples, "passed": passed,
        }),
        csv,
        notes: vec![format!("{} samples, max |f - f_closed| = {err:.3e}, spacelike: {spacelike}", sol.samples.len())],
    })
}

fn cmd_harness(cfg: &RunConfig) -> Result<Outcome> {
    let name = cfg.scenario_name()?;
    let inst = instantiate(name, &cfg.scenario_overrides())?;
    let g = inst.graph.as_ref().ok_or_else(|| Error::Config(format!("`{name}` is not a graph")))?;
    if !g.base.is_compact() || g.base.sectional_at(&[]) <= 0.0 {
        return Err(Error::Config(format!("`{name}` is not over a positively curved compact base")));
    }
    let report = theorem_harness(g, &inst.grid)?;
    Ok(Outcome {
        passed: report.passed,
        notes: vec![format!("verdict {} extremal {:.6e}", report.verdict, report.extremal)],
        json: json!({ "scenario": name, "resolution": inst.resolution, "harness": report, "passed": report.passed }),
        csv: None,
    })
}

fn cmd_zoo_list(cfg: &RunConfig) -> Result<Outcome> {
    let list = list_scenarios();
    let csv = if cfg.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "ambient", "dim", "compact", "default_resolution"])
            .map_err(|e| Error::Io(e.to_string()))?;
        for s in &list {
            w.write_record(&[
                s.name.clone(),
                s.ambient_key.clone(),
                s.dim.to_string(),
                s.compact.to_string(),
                s.default_resolution.to_string(),
            ])
            .map_err(|e| Error::Io(e.to_string()))?;
        }
        Some(String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).expect("csv is utf-8"))
    } else {
        None
    };
    Ok(Outcome { passed: true, json: json!({ "scenarios": list }), csv, notes: Vec::new() })
}

fn cmd_acceptance(cfg: &RunConfig) -> Result<Outcome> {
    let acfg = AcceptanceConfig::default();
    let report = run_all(&acfg, &cfg.criteria);
    let notes = report
        .criteria
        .iter()
        .map(|c| format!("criterion {} {}: {} ({})", c.id, if c.passed { "PASS" } else { "FAIL" }, c.title, c.summary))
        .collect();
    Ok(Outcome {
        passed: report.passed,
        json: json!({ "config": acfg, "criteria": report.criteria, "passed": report.passed }),
        csv: None,
        notes,
    })
}

/// Execute `cfg`.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.format == Format::Csv && !matches!(cfg.command, Command::SolveRadial | Command::ZooList) {
        return Err(Error::Config(format!("`{}` has no CSV output", cfg.command.name())));
    }
    match cfg.command {
        Command::Identities => cmd_identities(cfg),
        Command::Integral => cmd_integral(cfg),
        Command::SolveRadial => cmd_solve_radial(cfg),
        Command::Harness => cmd_harness(cfg),
        Command::ZooList => cmd_zoo_list(cfg),
        Command::Acceptance => cmd_acceptance(cfg),
    }
}

/// Serialized report text for an outcome.
pub fn render(cfg: &RunConfig, outcome: &Outcome) -> String {
    match &outcome.csv {
        Some(csv) => csv.clone(),
        None => {
            let mut s = serde_json::to_string_pretty(&envelope(cfg, outcome.json.clone())).expect("serializable");
            s.push('\n');
            s
        }
    }
}

/// Run and write the report; returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let outcome = match execute(cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    for n in &outcome.notes {
        eprintln!("{n}");
    }
    let text = render(cfg, &outcome);
    let written = match &cfg.output_path {
        Some(p) => std::fs::write(p, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: writing report: {e}");
        return 2;
    }
    if outcome.passed {
        0
    } else {
        1
    }
}

/// Parse arguments, run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match RunConfig::from_cli(cli) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
