//! Command-line front end: run a single solve, sweep a weight grid, or
//! validate a built-in problem's declared metadata.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mopp_core::problems::{registry, validate_problem};
use mopp_core::runner::{
    parse_config, parse_weights_file, sweep_weights, write_run_artifacts, write_sweep_artifacts,
    RunSetup,
};
use mopp_core::{run, Error, Termination};

#[derive(Parser)]
#[command(
    name = "mopp",
    version,
    about = "Proximal-point solver for multiobjective problems via linear scalarization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Configuration sources shared by `run` and `sweep`: an optional flat
/// key=value file plus per-key flags that override the file.
#[derive(Args, Clone)]
struct ConfigArgs {
    /// Flat key=value configuration file (optional when flags are complete)
    config: Option<PathBuf>,
    /// Problem name from the registry
    #[arg(long)]
    problem: Option<String>,
    /// Solver variant: SPP, ISPP, or CISPP
    #[arg(long)]
    variant: Option<String>,
    /// Start point, comma-separated
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Scalarization weights, comma-separated (normalized internally)
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// Step-size schedule: const:V, harmonic:V, or list:a,b,c
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Stop when the outer step norm falls below this
    #[arg(long)]
    step_tol: Option<String>,
    /// Criticality certificate tolerance
    #[arg(long)]
    crit_tol: Option<String>,
    /// Outer iteration cap
    #[arg(long)]
    max_outer: Option<String>,
    /// Inexactness budget scale (ISPP delta / CISPP error schedules)
    #[arg(long)]
    delta0: Option<String>,
    /// Seed recorded with the artifacts
    #[arg(long)]
    seed: Option<String>,
    /// Directory for artifact files
    #[arg(long)]
    out_dir: Option<String>,
}

impl ConfigArgs {
    fn to_setup(&self) -> Result<RunSetup, Error> {
        let file_text = match &self.config {
            Some(path) => Some(std::fs::read_to_string(path)?),
            None => None,
        };
        let mut overrides: Vec<(String, String)> = Vec::new();
        let mut push = |key: &str, value: &Option<String>| {
            if let Some(v) = value {
                overrides.push((key.to_string(), v.clone()));
            }
        };
        push("problem", &self.problem);
        push("variant", &self.variant);
        push("x0", &self.x0);
        push("z", &self.z);
        push("alpha", &self.alpha);
        push("step_tol", &self.step_tol);
        push("crit_tol", &self.crit_tol);
        push("max_outer", &self.max_outer);
        push("delta0", &self.delta0);
        push("seed", &self.seed);
        push("out_dir", &self.out_dir);
        parse_config(file_text.as_deref(), &overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and write iterations.csv + report.json
    Run(ConfigArgs),
    /// Run the configured variant once per weight vector and write sweep.csv
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Weights file: one comma-separated weight vector per line
        #[arg(long)]
        weights: PathBuf,
    },
    /// Sample-check a built-in problem's declared metadata
    Validate {
        /// Problem name from the registry
        problem: String,
        /// Number of sample points
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Sampling seed
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

/// Artifact directory precedence: MOPP_OUT_DIR beats the configured out_dir,
/// which beats the default `out`.
fn resolve_out_dir(configured: Option<&PathBuf>) -> PathBuf {
    if let Some(env) = std::env::var_os("MOPP_OUT_DIR") {
        return PathBuf::from(env);
    }
    configured.cloned().unwrap_or_else(|| PathBuf::from("out"))
}

fn fmt_vec(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|v| format!("{v:.5}")).collect();
    format!("[{}]", cells.join(", "))
}

fn cmd_run(args: &ConfigArgs) -> Result<u8, Error> {
    let setup = args.to_setup()?;
    let report = run(&setup.problem, &setup.config)?;
    let dir = resolve_out_dir(setup.out_dir.as_ref());
    let (csv_path, json_path) = write_run_artifacts(&report, &dir)?;

    println!(
        "problem: {} (variant {}, seed {})",
        report.problem, report.variant, setup.seed
    );
    println!(
        "termination: {} after {} steps",
        report.termination,
        report.steps()
    );
    println!("final x: {}", fmt_vec(report.final_x()));
    println!("final F: {}", fmt_vec(report.final_f()));
    if let Some(record) = report.records.last() {
        println!("scalarized: {:.5}", record.scalarized);
    }
    if let Some(cert) = &report.final_certificate {
        println!(
            "criticality residual: {:.3e} (critical: {})",
            cert.residual, cert.is_critical
        );
    }
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());

    if report.termination == Termination::InnerFailure {
        if let Some(message) = &report.failure_message {
            eprintln!("solver failure: {message}");
        }
        return Ok(3);
    }
    Ok(0)
}

fn cmd_sweep(args: &ConfigArgs, weights_path: &PathBuf) -> Result<u8, Error> {
    let setup = args.to_setup()?;
    let weights_text = std::fs::read_to_string(weights_path)?;
    let weights = parse_weights_file(&weights_text)?;
    let summary = sweep_weights(&setup.problem, &weights, &setup.config)?;
    let dir = resolve_out_dir(setup.out_dir.as_ref());
    let csv_path = write_sweep_artifacts(&summary, &dir)?;

    println!(
        "problem: {} (variant {}, {} weights)",
        summary.problem,
        summary.variant,
        summary.entries.len()
    );
    let failures = summary
        .entries
        .iter()
        .filter(|e| e.error.is_some())
        .count();
    println!(
        "kept {} of {} finals after the dominance filter ({} run failures)",
        summary.kept_count(),
        summary.entries.len(),
        failures
    );
    println!("wrote {}", csv_path.display());
    Ok(0)
}

fn cmd_validate(problem_name: &str, samples: usize, seed: u64) -> Result<u8, Error> {
    let problem = registry(problem_name)?;
    let report = validate_problem(&problem, samples, seed)?;
    println!("{report}");
    Ok(0)
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Config(_) | Error::Weight(_) | Error::Contract(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep { config, weights } => cmd_sweep(config, weights),
        Command::Validate {
            problem,
            samples,
            seed,
        } => cmd_validate(problem, *samples, *seed),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
