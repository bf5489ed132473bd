//! `jungck-fp`: check, certify and solve common fixed point scenarios.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jungck_core::pipeline::{self, Settings, DEFAULT_SEED};
use jungck_core::scenario::{builtin_catalog, catalog_entry, catalog_source, save_report, Report, Scenario};

const EXIT_OK: u8 = 0;
const EXIT_FAILED: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "jungck-fp", version, about = "Certify contraction hypotheses and solve for common fixed points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the altering distance, gauges, integrand and range containment.
    Check(RunArgs),
    /// Sample the contraction inequality over stratified pairs.
    Certify(RunArgs),
    /// Run the iteration and publish the common fixed point.
    Solve(RunArgs),
    /// Check, certify and solve, writing one combined report.
    Report(RunArgs),
    /// List built-in scenarios, or print one as TOML.
    Catalog {
        /// Scenario to print.
        name: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Structured,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Built-in scenario name or path to a scenario file.
    #[arg(value_name = "SCENARIO", required_unless_present = "scenario_flag", conflicts_with = "scenario_flag")]
    scenario: Option<String>,
    #[arg(long = "scenario", value_name = "SCENARIO")]
    scenario_flag: Option<String>,
    #[arg(long, value_parser = positive_f64)]
    tol: Option<f64>,
    #[arg(long, value_parser = positive_f64)]
    rf_tol: Option<f64>,
    #[arg(long, value_parser = positive_usize)]
    n_pairs: Option<usize>,
    #[arg(long, env = "JUNGCK_FP_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_parser = positive_usize)]
    max_iters: Option<usize>,
    /// Start of the iteration (default: domain midpoint).
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    /// Write the structured report here; `solve` also writes `<stem>.trace.csv` beside it.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Certify even when the hypothesis check fails.
    #[arg(long)]
    force: bool,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be a positive number".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

impl RunArgs {
    fn settings(&self) -> Settings {
        let d = Settings::default();
        Settings {
            tol: self.tol.unwrap_or(d.tol),
            rf_tol: self.rf_tol.unwrap_or(d.rf_tol),
            n_pairs: self.n_pairs.unwrap_or(d.n_pairs),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            seed: self.seed,
            x0: self.x0,
            ..d
        }
    }

    fn scenario_ref(&self) -> &str {
        self.scenario.as_deref().or(self.scenario_flag.as_deref()).unwrap_or_default()
    }
}

/// A built-in name, or else a path to a scenario file.
fn resolve(reference: &str) -> Result<Scenario, String> {
    if let Some(sc) = catalog_entry(reference) {
        return Ok(sc);
    }
    let path = Path::new(reference);
    if !path.exists() {
        return Err(format!("`{reference}` is neither a built-in scenario nor an existing file"));
    }
    Scenario::load(path).map_err(|e| format!("{}: {e}", path.display()))
}

struct Failure(u8, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_INPUT, e.to_string())
    }
}

fn trace_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    output.with_file_name(format!("{stem}.trace.csv"))
}

fn run(command: Command) -> Result<u8, Failure> {
    let (kind, args) = match command {
        Command::Catalog { name, format } => return catalog(name.as_deref(), format),
        Command::Check(a) => ("check", a),
        Command::Certify(a) => ("certify", a),
        Command::Solve(a) => ("solve", a),
        Command::Report(a) => ("report", a),
    };
    let scenario = resolve(args.scenario_ref()).map_err(|e| Failure(EXIT_INPUT, e))?;
    let settings = args.settings();
    let mut report = Report::new(&scenario, settings);
    let mut trace = None;
    let mut notes = Vec::new();

    if kind != "solve" {
        report.check = Some(pipeline::check(&scenario, &settings)?);
    }
    if kind == "certify" || kind == "report" {
        let check_ok = report.check.as_ref().is_some_and(|c| c.passed);
        if check_ok || args.force || kind == "report" {
            report.certify = Some(pipeline::certify_scenario(&scenario, &settings)?);
        } else {
            notes.push("hypothesis check failed; certificate skipped (use --force to run it anyway)".to_string());
        }
    }
    if kind == "solve" || kind == "report" {
        let outcome = pipeline::solve(&scenario, &settings)?;
        report.solve = Some(outcome.report);
        trace = Some(outcome.trace);
    }

    if let Some(path) = &args.output {
        save_report(&report, path)?;
        if let Some(trace) = &trace {
            let file = std::fs::File::create(trace_path(path))?;
            trace.write_csv(std::io::BufWriter::new(file))?;
        }
    }
    match args.format {
        Format::Structured => println!("{}", report.to_json()?),
        Format::Human => {
            print!("{}", render::report(&scenario, &report));
            for n in &notes {
                println!("note: {n}");
            }
        }
    }
    let passed = report.passed() && notes.is_empty();
    Ok(if passed { EXIT_OK } else { EXIT_FAILED })
}

fn catalog(name: Option<&str>, format: Format) -> Result<u8, Failure> {
    match name {
        Some(name) => {
            let src = catalog_source(name).ok_or_else(|| Failure(EXIT_INPUT, format!("no built-in scenario `{name}`")))?;
            match format {
                Format::Human => print!("{src}"),
                Format::Structured => {
                    let sc = catalog_entry(name).expect("catalog source parses");
                    println!("{}", serde_json::to_string_pretty(&sc)?);
                }
            }
        }
        None => {
            let all = builtin_catalog();
            match format {
                Format::Human => {
                    for sc in &all {
                        println!("{:<22} {}", sc.name, sc.description);
                    }
                }
                Format::Structured => println!("{}", serde_json::to_string_pretty(&all)?),
            }
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
