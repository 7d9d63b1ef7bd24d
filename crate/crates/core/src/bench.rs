//! Random-coloring baselines and the timed experiment harness.
//!
//! For each instance and seed the harness times `hereditary_minimize`, then
//! gives the repeated-sampling baseline the same wall-clock budget. The
//! single-sample baseline is reported as the median per-trial discrepancy
//! inside that run.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::coloring::{disc_inf, hereditary_minimize, Coloring};
use crate::error::{Error, Result};
use crate::instances::{InstanceKind, InstanceSpec};
use crate::linalg::{DenseMatrix, RandomSource};

const HEREDITARY_STREAM: u64 = 16;
const SAMPLING_STREAM: u64 = 17;

/// One uniform coloring and its discrepancy.
pub fn baseline_sample(a: &DenseMatrix, rng: &mut RandomSource) -> Result<(Coloring, f64)> {
    let x = random_signs(a.cols(), rng);
    let disc = disc_inf(a, &to_f64(&x))?;
    Ok((Coloring::new(x)?, disc))
}

fn random_signs(n: usize, rng: &mut RandomSource) -> Vec<i8> {
    (0..n).map(|_| rng.sign()).collect()
}

fn to_f64(x: &[i8]) -> Vec<f64> {
    x.iter().map(|&s| f64::from(s)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleBudget {
    Seconds(f64),
    Trials(usize),
}

impl SampleBudget {
    fn validate(self) -> Result<Self> {
        match self {
            SampleBudget::Seconds(s) if s > 0.0 && s.is_finite() => Ok(self),
            SampleBudget::Trials(t) if t > 0 => Ok(self),
            _ => Err(Error::ContractViolation(format!("sampling budget must be positive, got {self:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SampleManyOutcome {
    pub best: Coloring,
    pub best_disc: f64,
    /// Discrepancy of every trial, in sampling order.
    pub trial_discs: Vec<f64>,
    pub elapsed_s: f64,
    start: RandomSource,
}

impl SampleManyOutcome {
    pub fn trials(&self) -> usize {
        self.trial_discs.len()
    }

    /// Index of the lower median trial.
    pub fn median_trial(&self) -> usize {
        let mut order: Vec<usize> = (0..self.trial_discs.len()).collect();
        order.sort_by(|&i, &j| self.trial_discs[i].total_cmp(&self.trial_discs[j]).then(i.cmp(&j)));
        order[(order.len() - 1) / 2]
    }

    pub fn median_disc(&self) -> f64 {
        self.trial_discs[self.median_trial()]
    }

    /// Replays the sampling stream up to trial `k`.
    pub fn trial_coloring(&self, k: usize) -> Result<Coloring> {
        if k >= self.trials() {
            return Err(Error::ContractViolation(format!("trial {k} of {}", self.trials())));
        }
        let mut rng = self.start.clone();
        let n = self.best.len();
        for _ in 0..k {
            random_signs(n, &mut rng);
        }
        Coloring::new(random_signs(n, &mut rng))
    }
}

/// Draws uniform colorings until the budget is spent and keeps the best.
/// The first trial uses the stream exactly as [`baseline_sample`] would, and
/// at least one trial always runs.
pub fn baseline_sample_many(a: &DenseMatrix, budget: SampleBudget, rng: &mut RandomSource) -> Result<SampleManyOutcome> {
    let budget = budget.validate()?;
    let start = rng.clone();
    let clock = Instant::now();
    let deadline = match budget {
        SampleBudget::Seconds(s) => Some(Duration::from_secs_f64(s)),
        SampleBudget::Trials(_) => None,
    };
    let mut best: Option<(Vec<i8>, f64)> = None;
    let mut trial_discs = Vec::new();
    loop {
        let x = random_signs(a.cols(), rng);
        let d = disc_inf(a, &to_f64(&x))?;
        trial_discs.push(d);
        if best.as_ref().is_none_or(|(_, b)| d < *b) {
            best = Some((x, d));
        }
        let done = match (budget, deadline) {
            (SampleBudget::Trials(t), _) => trial_discs.len() >= t,
            (_, Some(limit)) => clock.elapsed() >= limit,
            _ => true,
        };
        if done {
            break;
        }
    }
    let (x, best_disc) = best.expect("at least one trial runs");
    Ok(SampleManyOutcome { best: Coloring::new(x)?, best_disc, trial_discs, elapsed_s: clock.elapsed().as_secs_f64(), start })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Hereditary,
    Sample,
    SampleMany,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Hereditary, Algorithm::Sample, Algorithm::SampleMany];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Hereditary => "hereditary",
            Algorithm::Sample => "sample",
            Algorithm::SampleMany => "sample_many",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Algorithm::Hereditary => "HereditaryMinimize",
            Algorithm::Sample => "Sample",
            Algorithm::SampleMany => "SampleMany",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::ContractViolation(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum BudgetMode {
    /// Sample for as long as `hereditary_minimize` took on the same instance.
    #[default]
    MatchedTime,
    Trials(usize),
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    /// Instance shapes; the seed of each spec is replaced by every entry of
    /// `seeds` in turn.
    pub specs: Vec<InstanceSpec>,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    pub budget_mode: BudgetMode,
}

impl ExperimentConfig {
    pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

    pub fn new(specs: Vec<InstanceSpec>) -> Self {
        ExperimentConfig {
            specs,
            seeds: Self::DEFAULT_SEEDS.to_vec(),
            algorithms: Algorithm::ALL.to_vec(),
            budget_mode: BudgetMode::MatchedTime,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.specs.is_empty() || self.seeds.is_empty() || self.algorithms.is_empty() {
            return Err(Error::ContractViolation("experiment needs specs, seeds and algorithms".into()));
        }
        if let BudgetMode::Trials(0) = self.budget_mode {
            return Err(Error::ContractViolation("trial budget must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub algorithm: Algorithm,
    pub kind: InstanceKind,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub disc: f64,
    /// Wall-clock seconds, millisecond resolution.
    pub elapsed_s: f64,
    pub trials: Option<usize>,
    pub retries: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RowFailure {
    pub algorithm: Algorithm,
    pub spec: InstanceSpec,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<RowFailure>,
}

/// A finished run: the row plus the coloring it reports.
#[derive(Clone, Debug)]
pub struct RowColoring {
    pub row: ResultRow,
    pub coloring: Coloring,
}

fn millis(s: f64) -> f64 {
    (s * 1000.0).round() / 1000.0
}

/// Runs every requested algorithm on one instance. Errors of one algorithm
/// are reported without stopping the others.
pub fn run_instance(
    a: &DenseMatrix,
    spec: &InstanceSpec,
    algorithms: &[Algorithm],
    budget_mode: BudgetMode,
) -> (Vec<RowColoring>, Vec<RowFailure>) {
    let mut done = Vec::new();
    let mut failures = Vec::new();
    let row = |algorithm, disc, elapsed_s, trials, retries| ResultRow {
        algorithm,
        kind: spec.kind,
        m: spec.m,
        n: spec.n,
        seed: spec.seed,
        disc,
        elapsed_s: millis(elapsed_s),
        trials,
        retries,
    };
    let wants = |alg| algorithms.contains(&alg);
    let sampling = wants(Algorithm::Sample) || wants(Algorithm::SampleMany);

    let mut hereditary_time = None;
    if wants(Algorithm::Hereditary) || (sampling && budget_mode == BudgetMode::MatchedTime) {
        let clock = Instant::now();
        let result = hereditary_minimize(a, &mut RandomSource::with_stream(spec.seed, HEREDITARY_STREAM));
        let elapsed = clock.elapsed().as_secs_f64();
        hereditary_time = Some(elapsed);
        match result {
            Ok((coloring, report)) if wants(Algorithm::Hereditary) => done.push(RowColoring {
                row: row(Algorithm::Hereditary, report.final_disc, elapsed, None, Some(report.total_retries())),
                coloring,
            }),
            Ok(_) => {}
            Err(e) => failures.push(RowFailure { algorithm: Algorithm::Hereditary, spec: *spec, message: e.to_string() }),
        }
    }

    if sampling {
        let budget = match (budget_mode, hereditary_time) {
            (BudgetMode::Trials(t), _) => SampleBudget::Trials(t),
            // a budget of zero would be rejected; one trial still runs
            (BudgetMode::MatchedTime, Some(t)) => SampleBudget::Seconds(t.max(1e-9)),
            (BudgetMode::MatchedTime, None) => unreachable!("hereditary runs in matched-time mode"),
        };
        let outcome = baseline_sample_many(a, budget, &mut RandomSource::with_stream(spec.seed, SAMPLING_STREAM));
        let outcome = outcome.and_then(|o| {
            let median = o.trial_coloring(o.median_trial())?;
            Ok((o, median))
        });
        match outcome {
            Ok((o, median)) => {
                if wants(Algorithm::Sample) {
                    let per_trial = o.elapsed_s / o.trials() as f64;
                    done.push(RowColoring {
                        row: row(Algorithm::Sample, o.median_disc(), per_trial, None, None),
                        coloring: median,
                    });
                }
                if wants(Algorithm::SampleMany) {
                    done.push(RowColoring {
                        row: row(Algorithm::SampleMany, o.best_disc, o.elapsed_s, Some(o.trials()), None),
                        coloring: o.best.clone(),
                    });
                }
            }
            Err(e) => {
                for alg in [Algorithm::Sample, Algorithm::SampleMany].into_iter().filter(|&a| wants(a)) {
                    failures.push(RowFailure { algorithm: alg, spec: *spec, message: e.to_string() });
                }
            }
        }
    }
    done.sort_by_key(|r| r.row.algorithm);
    (done, failures)
}

/// Runs every (spec, seed) pair. Instances are generated from the pair, and
/// each algorithm draws from its own stream of the seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut out = ExperimentOutput::default();
    for shape in &config.specs {
        for &seed in &config.seeds {
            let spec = InstanceSpec::new(shape.kind, shape.m, shape.n, seed)?;
            let a = match spec.generate() {
                Ok(a) => a,
                Err(e) => {
                    for &alg in &config.algorithms {
                        out.failures.push(RowFailure { algorithm: alg, spec, message: e.to_string() });
                    }
                    continue;
                }
            };
            let (rows, failures) = run_instance(&a, &spec, &config.algorithms, config.budget_mode);
            out.rows.extend(rows.into_iter().map(|r| r.row));
            out.failures.extend(failures);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(Error::ContractViolation(format!("unknown report format `{s}`"))),
        }
    }
}

pub const CSV_HEADER: &str = "algorithm,kind,m,n,seed,disc,elapsed_s,trials,retries";

pub fn render_report(rows: &[ResultRow], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            for r in rows {
                w.serialize(r)?;
            }
            let body = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)
                .expect("csv output of ASCII fields is UTF-8");
            Ok(format!("{CSV_HEADER}\n{body}"))
        }
        ReportFormat::Json => Ok(serde_json::to_string_pretty(rows)? + "\n"),
        ReportFormat::Markdown => Ok(render_markdown(rows)),
    }
}

pub fn emit_report(rows: &[ResultRow], format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render_report(rows, format)?)?;
    Ok(())
}

pub fn read_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Parse { line: 1, message: format!("expected header `{CSV_HEADER}`") });
    }
    let rows = r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?;
    if let Some(bad) = rows.iter().position(|r| !(r.disc >= 0.0 && r.elapsed_s >= 0.0) || r.m == 0 || r.n == 0) {
        return Err(Error::Parse { line: bad + 2, message: "invalid result row".into() });
    }
    Ok(rows)
}

/// Median of a non-empty list; the mean of the middle pair for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 { v[k] } else { (v[k - 1] + v[k]) / 2.0 }
}

/// One line per algorithm and matrix size with the median discrepancy per
/// instance type across seeds and the median time.
fn render_markdown(rows: &[ResultRow]) -> String {
    let mut groups: Vec<(usize, usize, Algorithm)> = rows.iter().map(|r| (r.m, r.n, r.algorithm)).collect();
    groups.sort_by_key(|&(m, n, alg)| (m * n, m, alg));
    groups.dedup();
    let mut out = String::from(
        "| Algorithm | Matrix Size | Disc Uniform | Disc 2D Corner | Disc 2D Halfspace | Time (s) |\n\
         |---|---|---:|---:|---:|---:|\n",
    );
    for (m, n, alg) in groups {
        let group: Vec<&ResultRow> = rows.iter().filter(|r| (r.m, r.n, r.algorithm) == (m, n, alg)).collect();
        let _ = write!(out, "| {} | {m} × {n} |", alg.label());
        for kind in InstanceKind::ALL {
            let discs: Vec<f64> = group.iter().filter(|r| r.kind == kind).map(|r| r.disc).collect();
            if discs.is_empty() {
                out.push_str(" – |");
            } else {
                let _ = write!(out, " {} |", round_cell(median(&discs)));
            }
        }
        let times: Vec<f64> = group.iter().map(|r| r.elapsed_s).collect();
        let _ = writeln!(out, " {:.3} |", median(&times));
    }
    out
}

fn round_cell(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    format!("{r}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(m: usize, n: usize, seed: u64) -> DenseMatrix {
        crate::instances::gen_uniform(&InstanceSpec::new(InstanceKind::Uniform, m, n, seed).unwrap()).unwrap()
    }

    #[test]
    fn single_sample_basics() {
        let (x, d) = baseline_sample(&DenseMatrix::zeros(3, 1), &mut RandomSource::new(1)).unwrap();
        assert_eq!(x.len(), 1);
        assert_eq!(d, 0.0);
        let a = uniform(10, 6, 2);
        let (x, d) = baseline_sample(&a, &mut RandomSource::new(9)).unwrap();
        assert_eq!(d, x.disc(&a).unwrap());
    }

    #[test]
    fn one_trial_matches_single_sample() {
        let a = uniform(12, 9, 3);
        for seed in 0..10 {
            let (x, d) = baseline_sample(&a, &mut RandomSource::new(seed)).unwrap();
            let many = baseline_sample_many(&a, SampleBudget::Trials(1), &mut RandomSource::new(seed)).unwrap();
            assert_eq!((&many.best, many.best_disc, many.trials()), (&x, d, 1));
        }
    }

    #[test]
    fn many_never_worse_than_first_trial() {
        let a = uniform(20, 15, 4);
        for seed in 0..10 {
            let (_, first) = baseline_sample(&a, &mut RandomSource::new(seed)).unwrap();
            let many = baseline_sample_many(&a, SampleBudget::Trials(50), &mut RandomSource::new(seed)).unwrap();
            assert!(many.best_disc <= first);
            assert_eq!(many.trial_discs[0], first);
            assert_eq!(many.best_disc, many.trial_discs.iter().copied().fold(f64::INFINITY, f64::min));
            assert_eq!(many.best.disc(&a).unwrap(), many.best_disc);
        }
    }

    #[test]
    fn replayed_trials_reproduce_their_discs() {
        let a = uniform(15, 10, 5);
        let many = baseline_sample_many(&a, SampleBudget::Trials(31), &mut RandomSource::new(6)).unwrap();
        let k = many.median_trial();
        assert_eq!(many.trial_coloring(k).unwrap().disc(&a).unwrap(), many.median_disc());
        let mut sorted = many.trial_discs.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(many.median_disc(), sorted[15]);
        assert!(many.trial_coloring(31).is_err());
    }

    #[test]
    fn time_budget_is_respected() {
        let a = uniform(50, 50, 6);
        let many = baseline_sample_many(&a, SampleBudget::Seconds(0.05), &mut RandomSource::new(1)).unwrap();
        assert!(many.trials() > 1);
        assert!(many.elapsed_s >= 0.05 && many.elapsed_s < 0.055 + 0.01);
        assert!(baseline_sample_many(&a, SampleBudget::Seconds(0.0), &mut RandomSource::new(1)).is_err());
        assert!(baseline_sample_many(&a, SampleBudget::Trials(0), &mut RandomSource::new(1)).is_err());
    }

    #[test]
    fn zero_matrix_experiment_reports_zero() {
        let a = DenseMatrix::zeros(6, 6);
        let spec = InstanceSpec::new(InstanceKind::Uniform, 6, 6, 1).unwrap();
        let (rows, failures) = run_instance(&a, &spec, &Algorithm::ALL, BudgetMode::MatchedTime);
        assert!(failures.is_empty());
        assert_eq!(rows.len(), 3);
        for r in rows {
            assert_eq!(r.row.disc, 0.0);
            assert_eq!(r.coloring.disc(&a).unwrap(), 0.0);
        }
    }

    #[test]
    fn experiment_rows_are_deterministic() {
        let mut config = ExperimentConfig::new(vec![InstanceSpec::new(InstanceKind::Corner2d, 24, 16, 0).unwrap()]);
        config.seeds = vec![1, 2];
        config.budget_mode = BudgetMode::Trials(20);
        let first = run_experiment(&config).unwrap();
        let second = run_experiment(&config).unwrap();
        assert!(first.failures.is_empty());
        assert_eq!(first.rows.len(), 6);
        for (a, b) in first.rows.iter().zip(&second.rows) {
            assert_eq!((a.algorithm, a.seed, a.disc, a.trials, a.retries), (b.algorithm, b.seed, b.disc, b.trials, b.retries));
        }
        let sample = first.rows.iter().find(|r| r.algorithm == Algorithm::Sample).unwrap();
        let many = first.rows.iter().find(|r| r.algorithm == Algorithm::SampleMany).unwrap();
        assert!(many.disc <= sample.disc);
        assert_eq!(many.trials, Some(20));
    }

    #[test]
    fn matched_time_tracks_hereditary_time() {
        let a = uniform(60, 60, 7);
        let spec = InstanceSpec::new(InstanceKind::Uniform, 60, 60, 7).unwrap();
        let (rows, _) = run_instance(&a, &spec, &Algorithm::ALL, BudgetMode::MatchedTime);
        let h = rows[0].row.elapsed_s;
        let s = rows[2].row.elapsed_s;
        assert!((s - h).abs() <= 0.1 * h + 2e-3, "hereditary {h}s vs sampling {s}s");
    }

    #[test]
    fn config_validation() {
        assert!(run_experiment(&ExperimentConfig::new(vec![])).is_err());
        let mut c = ExperimentConfig::new(vec![InstanceSpec::new(InstanceKind::Uniform, 2, 2, 0).unwrap()]);
        c.seeds.clear();
        assert!(run_experiment(&c).is_err());
        assert_eq!(ExperimentConfig::new(vec![]).seeds.len(), 5);
    }

    fn sample_rows() -> Vec<ResultRow> {
        let mut rows = Vec::new();
        for (i, (m, n)) in [(10, 10), (20, 10), (30, 30), (40, 20)].into_iter().enumerate() {
            for alg in Algorithm::ALL {
                rows.push(ResultRow {
                    algorithm: alg,
                    kind: InstanceKind::ALL[i % 3],
                    m,
                    n,
                    seed: i as u64,
                    disc: 1.5 + i as f64,
                    elapsed_s: 0.25,
                    trials: (alg == Algorithm::SampleMany).then_some(7),
                    retries: (alg == Algorithm::Hereditary).then_some(0),
                });
            }
        }
        rows
    }

    #[test]
    fn csv_header_and_round_trip() {
        assert_eq!(render_report(&[], ReportFormat::Csv).unwrap(), format!("{CSV_HEADER}\n"));
        let rows = sample_rows();
        let text = render_report(&rows[..1], ReportFormat::Csv).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "hereditary,uniform,10,10,0,1.5,0.25,,0");
        assert_eq!(read_results_csv(&text).unwrap(), &rows[..1]);
        assert_eq!(read_results_csv(&render_report(&rows, ReportFormat::Csv).unwrap()).unwrap(), rows);
        assert!(read_results_csv("a,b\n1,2\n").is_err());
        assert!(read_results_csv(&format!("{CSV_HEADER}\nsample,uniform,1,1,0,-1,0,,\n")).is_err());
    }

    #[test]
    fn json_round_trip() {
        let rows = sample_rows();
        let text = render_report(&rows, ReportFormat::Json).unwrap();
        let back: Vec<ResultRow> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn markdown_layout() {
        let text = render_report(&sample_rows(), ReportFormat::Markdown).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("| Algorithm | Matrix Size | Disc Uniform"));
        assert_eq!(lines.len(), 2 + 12);
        assert_eq!(lines[2], "| HereditaryMinimize | 10 × 10 | 1.5 | – | – | 0.250 |");
        assert!(lines[3].starts_with("| Sample | 10 × 10 |"));
    }

    #[test]
    fn median_values() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[7.0]), 7.0);
    }

    #[test]
    fn parse_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("md".parse::<ReportFormat>().unwrap(), ReportFormat::Markdown);
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}
