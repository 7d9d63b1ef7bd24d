//! The `herdisc` command line.
//!
//! Exit codes: 0 on success, 1 when an algorithm gives up (or, with
//! `--strict`, when any experiment row fails), 2 for usage, parse and I/O
//! errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, Algorithm, BudgetMode, ExperimentConfig, ReportFormat, SampleBudget};
use crate::coloring::{disc_inf, hereditary_minimize};
use crate::error::{Error, Result};
use crate::instances::{self, InstanceKind, InstanceSpec};
use crate::linalg::RandomSource;
use crate::structure::herdisc_lower_bound;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ALGORITHM: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "herdisc", version, about = "Low-discrepancy colorings of real matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random benchmark matrix.
    Generate {
        #[arg(long = "type", value_name = "TYPE")]
        kind: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Color a matrix with the hereditary discrepancy algorithm.
    Minimize {
        #[command(flatten)]
        input: MatrixArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the coloring.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the JSON run report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Color a matrix with random sampling.
    Baseline {
        #[command(flatten)]
        input: MatrixArg,
        #[arg(long, value_enum, default_value_t = Mode::Sample)]
        mode: Mode,
        #[arg(long, conflicts_with = "budget_trials")]
        budget_seconds: Option<f64>,
        #[arg(long)]
        budget_trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the spectral lower bound on the hereditary discrepancy.
    LowerBound {
        #[command(flatten)]
        input: MatrixArg,
    },
    /// Run the benchmark table.
    Experiment(ExperimentArgs),
    /// Print the discrepancy of a coloring.
    Verify {
        #[command(flatten)]
        input: MatrixArg,
        #[arg(long)]
        coloring: PathBuf,
    },
}

#[derive(Debug, Args)]
struct MatrixArg {
    #[arg(long)]
    matrix: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Sample,
    SampleMany,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Comma-separated `MxN` sizes.
    #[arg(long, default_value = "200x200,1000x1000")]
    sizes: String,
    #[arg(long, default_value = "uniform,corner2d,halfspace2d")]
    types: String,
    #[arg(long, default_value = "1,2,3,4,5")]
    seeds: String,
    /// Give the sampling baseline a fixed number of trials instead of the
    /// hereditary running time.
    #[arg(long)]
    budget_trials: Option<usize>,
    /// Result rows, written in `--format`.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Markdown table; printed to stdout as well.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Exit with 1 if any row failed.
    #[arg(long)]
    strict: bool,
}

/// Parses `200x200,1000x1000`.
pub fn parse_sizes(text: &str) -> Result<Vec<(usize, usize)>> {
    list(text, "size", |item| {
        let (m, n) = item.split_once(['x', 'X'])?;
        let m: usize = m.trim().parse().ok()?;
        let n: usize = n.trim().parse().ok()?;
        (m > 0 && n > 0).then_some((m, n))
    })
}

pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    list(text, "seed", |item| item.parse().ok())
}

pub fn parse_kinds(text: &str) -> Result<Vec<InstanceKind>> {
    list(text, "type", |item| item.parse().ok())
}

fn list<T>(text: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.iter().all(|s| s.is_empty()) {
        return Err(Error::ContractViolation(format!("empty {what} list")));
    }
    items
        .into_iter()
        .map(|item| parse(item).ok_or_else(|| Error::ContractViolation(format!("invalid {what} `{item}`"))))
        .collect()
}

/// Runs the command line in-process and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    run_with(args, &mut stdout, &mut stderr)
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::RetryLimit { .. } | Error::Stall(_) => EXIT_ALGORITHM,
        _ => EXIT_USAGE,
    }
}

fn write_line(out: &mut dyn Write, line: &str) -> Result<()> {
    writeln!(out, "{line}")?;
    Ok(())
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Generate { kind, m, n, seed, out: path } => {
            let spec = InstanceSpec::new(kind.parse()?, m, n, seed)?;
            instances::write_matrix(&spec.generate()?, path)?;
        }
        Command::Minimize { input, seed, out: path, report } => {
            let a = instances::read_matrix(&input.matrix)?;
            let clock = Instant::now();
            let (x, run) = hereditary_minimize(&a, &mut RandomSource::new(seed))?;
            let elapsed = clock.elapsed().as_secs_f64();
            if let Some(path) = path {
                instances::write_coloring(&x, path)?;
            }
            if let Some(path) = report {
                fs::write(path, serde_json::to_string_pretty(&run)? + "\n")?;
            }
            write_line(out, &format!("disc={} bound={} elapsed={}", run.final_disc, run.total_bound, elapsed))?;
        }
        Command::Baseline { input, mode, budget_seconds, budget_trials, seed, out: path } => {
            let a = instances::read_matrix(&input.matrix)?;
            let mut rng = RandomSource::new(seed);
            let clock = Instant::now();
            let (x, disc, trials) = match mode {
                Mode::Sample => {
                    let (x, d) = bench::baseline_sample(&a, &mut rng)?;
                    (x, d, 1)
                }
                Mode::SampleMany => {
                    let budget = match (budget_seconds, budget_trials) {
                        (Some(s), _) => SampleBudget::Seconds(s),
                        (None, Some(t)) => SampleBudget::Trials(t),
                        (None, None) => {
                            return Err(Error::ContractViolation(
                                "sample-many needs --budget-seconds or --budget-trials".into(),
                            ))
                        }
                    };
                    let o = bench::baseline_sample_many(&a, budget, &mut rng)?;
                    let trials = o.trials();
                    (o.best, o.best_disc, trials)
                }
            };
            let elapsed = clock.elapsed().as_secs_f64();
            if let Some(path) = path {
                instances::write_coloring(&x, path)?;
            }
            write_line(out, &format!("disc={disc} trials={trials} elapsed={elapsed}"))?;
        }
        Command::LowerBound { input } => {
            let a = instances::read_matrix(&input.matrix)?;
            let lb = herdisc_lower_bound(&a)?;
            write_line(out, &format!("lower_bound={} k={}", lb.value, lb.argmax_k))?;
        }
        Command::Experiment(args) => return experiment(args, out, err),
        Command::Verify { input, coloring } => {
            let a = instances::read_matrix(&input.matrix)?;
            let x = instances::read_coloring(coloring)?;
            write_line(out, &format!("disc={}", disc_inf(&a, &x.to_f64())?))?;
        }
    }
    Ok(EXIT_OK)
}

fn experiment(args: ExperimentArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let sizes = parse_sizes(&args.sizes)?;
    let kinds = parse_kinds(&args.types)?;
    let format: ReportFormat = args.format.parse()?;
    let mut specs = Vec::new();
    for &(m, n) in &sizes {
        for &kind in &kinds {
            specs.push(InstanceSpec::new(kind, m, n, 0)?);
        }
    }
    let config = ExperimentConfig {
        specs,
        seeds: parse_seeds(&args.seeds)?,
        algorithms: Algorithm::ALL.to_vec(),
        budget_mode: match args.budget_trials {
            Some(t) => BudgetMode::Trials(t),
            None => BudgetMode::MatchedTime,
        },
    };
    let output = bench::run_experiment(&config)?;
    bench::emit_report(&output.rows, format, &args.out)?;
    let table = bench::render_report(&output.rows, ReportFormat::Markdown)?;
    if let Some(path) = &args.report {
        write_file(path, &table)?;
    }
    out.write_all(table.as_bytes())?;
    for f in &output.failures {
        writeln!(err, "failed: {} on {} {}x{} seed {}: {}", f.algorithm.name(), f.spec.kind, f.spec.m, f.spec.n, f.spec.seed, f.message)?;
    }
    Ok(if args.strict && !output.failures.is_empty() { EXIT_ALGORITHM } else { EXIT_OK })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}
