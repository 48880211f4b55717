//! Experiment plumbing: flat key=value configuration, CSV iteration tables,
//! JSON run reports, weight sweeps, and artifact files. All emitted bytes are
//! deterministic for a fixed configuration.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{dominance, Dominance, ProblemSpec};
use crate::outer::{
    run, AlphaSchedule, BudgetSchedule, RunReport, SolverConfig, Termination, Variant,
    WeightSchedule,
};
use crate::problems::registry;
use crate::scalarization::{normalize_weights, WeightVector};

/// Everything a CLI invocation needs: the problem, the solver configuration,
/// and where artifacts should go.
#[derive(Clone, Debug)]
pub struct RunSetup {
    pub problem: ProblemSpec,
    pub config: SolverConfig,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

const CONFIG_KEYS: &[&str] = &[
    "problem",
    "variant",
    "x0",
    "z",
    "alpha",
    "step_tol",
    "crit_tol",
    "max_outer",
    "delta0",
    "seed",
    "out_dir",
];

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{value}' as a number")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{value}' as a count")))
}

fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|part| parse_f64(key, part))
        .collect()
}

fn parse_positive(key: &str, value: &str) -> Result<f64> {
    let v = parse_f64(key, value)?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Config(format!(
            "key '{key}': must be positive and finite, got {value}"
        )));
    }
    Ok(v)
}

fn parse_alpha(value: &str) -> Result<AlphaSchedule> {
    let value = value.trim();
    if let Some(rest) = value.strip_prefix("const:") {
        return Ok(AlphaSchedule::Constant(parse_positive("alpha", rest)?));
    }
    if let Some(rest) = value.strip_prefix("harmonic:") {
        return Ok(AlphaSchedule::Harmonic {
            initial: parse_positive("alpha", rest)?,
        });
    }
    if let Some(rest) = value.strip_prefix("list:") {
        let list = parse_f64_list("alpha", rest)?;
        if list.is_empty() || list.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::Config(
                "key 'alpha': list entries must be positive and finite".into(),
            ));
        }
        return Ok(AlphaSchedule::Sequence(list));
    }
    // a bare number is shorthand for a constant schedule
    Ok(AlphaSchedule::Constant(parse_positive("alpha", value)?))
}

fn parse_variant(value: &str) -> Result<Variant> {
    match value.trim().to_ascii_lowercase().as_str() {
        "spp" => Ok(Variant::Spp),
        "ispp" => Ok(Variant::Ispp),
        "cispp" => Ok(Variant::Cispp),
        other => Err(Error::Config(format!(
            "key 'variant': unknown variant '{other}' (expected spp, ispp, or cispp)"
        ))),
    }
}

/// Parse a flat `key=value` configuration. `file_text` holds the config file
/// body (empty lines and `#` comments are skipped); `overrides` are applied
/// on top, last occurrence winning, so command-line flags beat the file.
pub fn parse_config(
    file_text: Option<&str>,
    overrides: &[(String, String)],
) -> Result<RunSetup> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    if let Some(text) = file_text {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected key=value, got '{line}'",
                    lineno + 1
                ))
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
    }
    for (key, value) in overrides {
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    for key in map.keys() {
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "unknown key '{key}'; valid keys: {}",
                CONFIG_KEYS.join(", ")
            )));
        }
    }

    let problem_name = map
        .get("problem")
        .ok_or_else(|| Error::Config("missing required key 'problem'".into()))?;
    let problem = registry(problem_name)?;

    let variant = match map.get("variant") {
        Some(v) => parse_variant(v)?,
        None => Variant::Spp,
    };

    let x0 = match map.get("x0") {
        Some(v) => parse_f64_list("x0", v)?,
        None => return Err(Error::Config("missing required key 'x0'".into())),
    };

    let weights: WeightVector = match map.get("z") {
        Some(v) => normalize_weights(&parse_f64_list("z", v)?)?,
        None => normalize_weights(&vec![1.0; problem.objectives()])?,
    };

    let mut config = SolverConfig::new(variant, x0, weights);
    if let Some(v) = map.get("alpha") {
        config.alpha = parse_alpha(v)?;
    }
    if let Some(v) = map.get("step_tol") {
        config.step_tol = parse_positive("step_tol", v)?;
    }
    if let Some(v) = map.get("crit_tol") {
        config.crit_tol = parse_positive("crit_tol", v)?;
    }
    if let Some(v) = map.get("max_outer") {
        config.max_outer = parse_usize("max_outer", v)?;
    }
    let delta0 = match map.get("delta0") {
        Some(v) => {
            let d = parse_f64("delta0", v)?;
            if d < 0.0 || !d.is_finite() {
                return Err(Error::Config(format!(
                    "key 'delta0': must be nonnegative and finite, got {v}"
                )));
            }
            d
        }
        None => 0.1,
    };
    match variant {
        Variant::Spp => {}
        Variant::Ispp => {
            config.delta_budget = BudgetSchedule::PowerLaw {
                scale: delta0,
                exponent: 2.0,
            };
        }
        Variant::Cispp => {
            config.error_budget = BudgetSchedule::PowerLaw {
                scale: delta0,
                exponent: 2.0,
            };
        }
    }

    let seed = match map.get("seed") {
        Some(v) => v
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::Config(format!("key 'seed': cannot parse '{v}' as an integer")))?,
        None => 42,
    };
    let out_dir = map.get("out_dir").map(PathBuf::from);

    Ok(RunSetup {
        problem,
        config,
        seed,
        out_dir,
    })
}

fn fmt5(v: f64) -> String {
    format!("{v:.5}")
}

fn join5(values: &[f64], sep: char) -> String {
    values
        .iter()
        .map(|v| fmt5(*v))
        .collect::<Vec<_>>()
        .join(&sep.to_string())
}

/// Write the iteration table as CSV: one row per recorded state (the start
/// point included), reals at five decimal places, coordinates joined by `;`.
pub fn emit_iteration_table(report: &RunReport, sink: &mut dyn Write) -> Result<()> {
    let m = report
        .records
        .first()
        .map(|r| r.f.len())
        .ok_or_else(|| Error::Contract("report holds no records".into()))?;
    let mut header = String::from("k,inner_iters,x,step_norm,scalarized");
    for i in 1..=m {
        header.push_str(&format!(",F{i}"));
    }
    writeln!(sink, "{header}")?;
    for r in &report.records {
        writeln!(
            sink,
            "{},{},{},{},{},{}",
            r.k,
            r.inner_iterations,
            join5(&r.x, ';'),
            fmt5(r.step_norm),
            fmt5(r.scalarized),
            join5(&r.f, ',')
        )?;
    }
    Ok(())
}

/// Serialize the full run report as pretty JSON with stable key order.
pub fn emit_run_report(report: &RunReport, sink: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *sink, report)?;
    writeln!(sink)?;
    Ok(())
}

/// One weight's outcome within a sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepEntry {
    pub weights: Vec<f64>,
    /// Final iterate, absent when the run failed outright.
    pub x: Option<Vec<f64>>,
    /// Final objective vector, absent when the run failed outright.
    pub f: Option<Vec<f64>>,
    pub termination: Option<Termination>,
    /// Survived the dominance filter over all successful finals.
    pub kept: bool,
    /// Error text for runs that failed before producing a report.
    pub error: Option<String>,
}

/// All entries of a weight sweep, in input order.
#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub problem: String,
    pub variant: Variant,
    pub entries: Vec<SweepEntry>,
}

impl SweepSummary {
    pub fn kept_count(&self) -> usize {
        self.entries.iter().filter(|e| e.kept).count()
    }
}

/// Tolerance for the dominance filter applied to sweep finals.
const SWEEP_DOMINANCE_TOL: f64 = 1e-9;

/// Run the configured variant once per weight from the same start point and
/// filter the final objective vectors by dominance: an entry is kept when no
/// other successful final weakly dominates it. Individual run failures are
/// recorded and do not abort the sweep.
pub fn sweep_weights(
    problem: &ProblemSpec,
    weight_grid: &[WeightVector],
    base_config: &SolverConfig,
) -> Result<SweepSummary> {
    if weight_grid.is_empty() {
        return Err(Error::Config("weight sweep needs at least one weight".into()));
    }
    let mut entries: Vec<SweepEntry> = Vec::with_capacity(weight_grid.len());
    for z in weight_grid {
        let mut config = base_config.clone();
        config.weights = WeightSchedule::Constant(z.clone());
        match run(problem, &config) {
            Ok(report) => {
                let ok = report.termination != Termination::InnerFailure;
                entries.push(SweepEntry {
                    weights: z.as_slice().to_vec(),
                    x: Some(report.final_x().to_vec()),
                    f: Some(report.final_f().to_vec()),
                    termination: Some(report.termination),
                    kept: ok, // provisional; the dominance filter runs below
                    error: report.failure_message,
                });
            }
            Err(e) => entries.push(SweepEntry {
                weights: z.as_slice().to_vec(),
                x: None,
                f: None,
                termination: None,
                kept: false,
                error: Some(e.to_string()),
            }),
        }
    }

    let finals: Vec<(usize, Vec<f64>)> = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.kept)
        .map(|(i, e)| (i, e.f.clone().expect("kept entries have finals")))
        .collect();
    for (i, fi) in &finals {
        let dominated = finals.iter().any(|(j, fj)| {
            j != i
                && matches!(
                    dominance(fj, fi, SWEEP_DOMINANCE_TOL),
                    Dominance::StrictlyDominates | Dominance::WeaklyDominates
                )
        });
        if dominated {
            entries[*i].kept = false;
        }
    }

    Ok(SweepSummary {
        problem: problem.name().to_string(),
        variant: base_config.variant,
        entries,
    })
}

/// Write a sweep as CSV: weight and point coordinates joined by `;`, one
/// objective column per component, and whether the dominance filter kept the
/// entry. Failed runs leave the point and objective cells empty.
pub fn emit_sweep_table(summary: &SweepSummary, sink: &mut dyn Write) -> Result<()> {
    let m = summary
        .entries
        .first()
        .map(|e| e.weights.len())
        .unwrap_or(0);
    let mut header = String::from("z,x");
    for i in 1..=m {
        header.push_str(&format!(",F{i}"));
    }
    header.push_str(",kept");
    writeln!(sink, "{header}")?;
    for e in &summary.entries {
        let x = e.x.as_deref().map(|v| join5(v, ';')).unwrap_or_default();
        let f = match e.f.as_deref() {
            Some(v) => join5(v, ','),
            None => vec![""; m].join(","),
        };
        writeln!(sink, "{},{},{},{}", join5(&e.weights, ';'), x, f, e.kept)?;
    }
    Ok(())
}

/// Render the iteration table to a string.
pub fn iteration_table_string(report: &RunReport) -> Result<String> {
    let mut buf = Vec::new();
    emit_iteration_table(report, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

/// Render the run report to a JSON string.
pub fn run_report_string(report: &RunReport) -> Result<String> {
    let mut buf = Vec::new();
    emit_run_report(report, &mut buf)?;
    Ok(String::from_utf8(buf).expect("JSON output is UTF-8"))
}

/// Render a sweep table to a string.
pub fn sweep_table_string(summary: &SweepSummary) -> Result<String> {
    let mut buf = Vec::new();
    emit_sweep_table(summary, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

/// Write `iterations.csv` and `report.json` for a run into `dir` (created it
/// if missing); returns the two paths.
pub fn write_run_artifacts(report: &RunReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join("iterations.csv");
    let json_path = dir.join("report.json");
    std::fs::write(&csv_path, iteration_table_string(report)?)?;
    std::fs::write(&json_path, run_report_string(report)?)?;
    Ok((csv_path, json_path))
}

/// Write `sweep.csv` into `dir` (created if missing); returns the path.
pub fn write_sweep_artifacts(summary: &SweepSummary, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join("sweep.csv");
    std::fs::write(&csv_path, sweep_table_string(summary)?)?;
    Ok(csv_path)
}

/// Parse a weights file: one comma-separated weight vector per non-empty,
/// non-comment line.
pub fn parse_weights_file(text: &str) -> Result<Vec<WeightVector>> {
    let mut weights = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values = parse_f64_list("weights", line).map_err(|_| {
            Error::Config(format!(
                "weights file line {}: cannot parse '{line}'",
                lineno + 1
            ))
        })?;
        weights.push(normalize_weights(&values)?);
    }
    if weights.is_empty() {
        return Err(Error::Config("weights file holds no weight vectors".into()));
    }
    Ok(weights)
}
