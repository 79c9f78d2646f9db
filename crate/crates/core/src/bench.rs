//! Benchmark cases and accuracy reports.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::category::ErrorCategory;
use crate::pipeline::{classify_trial, run_pipeline, GenerationBackend, Oracle, Stage, TrialOutcome};
use crate::problem::{problem_to_text, signature_name, BaySpec, FrameProblem, SupportKind};

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const CASE_COUNT: usize = 20;
pub const BENCH_SPAN: f64 = 6.0;
pub const BENCH_HEIGHT: f64 = 3.0;

/// Story signatures included in every benchmark run.
pub const NAMED_SIGNATURES: [&[u32]; 9] = [
    &[3, 2, 3],
    &[3, 2, 4],
    &[3, 4, 3],
    &[5, 3, 2, 4, 1],
    &[2, 4, 3, 2, 5],
    &[2, 3, 3, 2, 5],
    &[2, 3, 1, 4, 5],
    &[2, 4, 3, 5, 1],
    &[3, 4, 5, 4, 3],
];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkCase {
    pub name: String,
    pub problem: FrameProblem,
}

impl BenchmarkCase {
    pub fn uniform(signature: &[u32]) -> BenchmarkCase {
        let problem =
            FrameProblem::uniform(signature, BENCH_SPAN, BENCH_HEIGHT).expect("benchmark signatures are valid");
        BenchmarkCase {
            name: signature_name(signature),
            problem,
        }
    }

    /// Plain-text description fed to the first pipeline stage.
    pub fn description(&self) -> String {
        problem_to_text(&self.problem)
    }
}

/// The 3-2-3 frame with 5/4/5 m stories and default loads and material.
pub fn mixed_height_case() -> BenchmarkCase {
    let heights = |n: usize| [5.0, 4.0, 5.0][..n].to_vec();
    let bays = vec![
        BaySpec::new(1, BENCH_SPAN, heights(3)),
        BaySpec::new(2, BENCH_SPAN, heights(2)),
        BaySpec::new(3, BENCH_SPAN, heights(3)),
    ];
    let problem =
        FrameProblem::new(bays, SupportKind::Fixed, Default::default(), Default::default()).expect("frame is valid");
    BenchmarkCase {
        name: "3-2-3/5-4-5".into(),
        problem,
    }
}

/// The nine named cases followed by five-bay signatures drawn from
/// {1..5}^5 with `seed`, skipping repeats, for twenty in total.
pub fn builtin_cases(seed: u64) -> Vec<BenchmarkCase> {
    let mut signatures: Vec<Vec<u32>> = NAMED_SIGNATURES.iter().map(|s| s.to_vec()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while signatures.len() < CASE_COUNT {
        let s: Vec<u32> = (0..5).map(|_| rng.random_range(1..=5)).collect();
        if !signatures.contains(&s) {
            signatures.push(s);
        }
    }
    signatures.iter().map(|s| BenchmarkCase::uniform(s)).collect()
}

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("at least one trial per case is required")]
    NoTrials,
    #[error("case {case}: reference model unavailable: {message}")]
    Oracle { case: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub outcome: TrialOutcome,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub name: String,
    pub trials: usize,
    pub successes: usize,
    pub accuracy: f64,
    pub mean_seconds: f64,
    pub failures: BTreeMap<ErrorCategory, usize>,
    pub records: Vec<TrialRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub backend: String,
    pub cases: Vec<CaseReport>,
    /// Failure counts over all cases.
    pub histogram: BTreeMap<ErrorCategory, usize>,
    /// Failure counts by the stage that failed.
    pub stage_histogram: BTreeMap<Stage, usize>,
}

impl AccuracyReport {
    pub fn total_trials(&self) -> usize {
        self.cases.iter().map(|c| c.trials).sum()
    }

    pub fn total_failures(&self) -> usize {
        self.cases.iter().map(|c| c.trials - c.successes).sum()
    }

    pub fn overall_accuracy(&self) -> f64 {
        let t = self.total_trials();
        (t - self.total_failures()) as f64 / t as f64
    }

    pub fn to_table(&self) -> String {
        let width = self.cases.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
        let mut out = format!("backend: {}\n", self.backend);
        out += &format!(
            "{:<width$}  {:>6}  {:>9}  {:>8}  {:>10}\n",
            "case", "trials", "successes", "accuracy", "mean_s"
        );
        for c in &self.cases {
            out += &format!(
                "{:<width$}  {:>6}  {:>9}  {:>8.2}  {:>10.4}\n",
                c.name, c.trials, c.successes, c.accuracy, c.mean_seconds
            );
        }
        out += &format!(
            "{:<width$}  {:>6}  {:>9}  {:>8.2}\n",
            "all",
            self.total_trials(),
            self.total_trials() - self.total_failures(),
            self.overall_accuracy()
        );
        if !self.histogram.is_empty() {
            out += "\nfailures by category:\n";
            for (cat, n) in &self.histogram {
                out += &format!("  {:<20} {n}\n", cat.as_str());
            }
        }
        out
    }

    /// One row per case; the category columns hold failure counts.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["case", "trials", "successes", "accuracy", "mean_seconds"];
        header.extend(ErrorCategory::ALL.iter().map(|c| c.as_str()));
        w.write_record(&header).expect("in-memory write");
        for c in &self.cases {
            let mut row = vec![
                c.name.clone(),
                c.trials.to_string(),
                c.successes.to_string(),
                format!("{:.4}", c.accuracy),
                format!("{:.6}", c.mean_seconds),
            ];
            row.extend(
                ErrorCategory::ALL
                    .iter()
                    .map(|cat| c.failures.get(cat).copied().unwrap_or(0).to_string()),
            );
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Runs every case `trials` times and aggregates the classified outcomes.
/// Trials run in parallel; the report order follows `cases`.
pub fn run_benchmark(
    backend: &dyn GenerationBackend,
    cases: &[BenchmarkCase],
    trials: usize,
) -> Result<AccuracyReport, BenchError> {
    if trials == 0 {
        return Err(BenchError::NoTrials);
    }
    let oracles = cases
        .iter()
        .map(|c| {
            Oracle::for_problem(&c.problem).map_err(|e| BenchError::Oracle {
                case: c.name.clone(),
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let inputs: Vec<String> = cases.iter().map(BenchmarkCase::description).collect();

    let jobs: Vec<(usize, usize)> = (0..cases.len())
        .flat_map(|c| (0..trials).map(move |t| (c, t)))
        .collect();
    let records: Vec<(usize, TrialRecord)> = jobs
        .par_iter()
        .map(|&(c, trial)| {
            let start = Instant::now();
            let result = run_pipeline(&inputs[c], backend);
            let outcome = classify_trial(&result, &oracles[c]);
            let seconds = start.elapsed().as_secs_f64();
            (
                c,
                TrialRecord {
                    trial,
                    outcome,
                    seconds,
                },
            )
        })
        .collect();

    let mut per_case: Vec<Vec<TrialRecord>> = vec![Vec::new(); cases.len()];
    for (c, r) in records {
        per_case[c].push(r);
    }
    let mut histogram = BTreeMap::new();
    let mut stage_histogram = BTreeMap::new();
    let reports = cases
        .iter()
        .zip(per_case)
        .map(|(case, records)| {
            let successes = records.iter().filter(|r| r.outcome.success).count();
            let mut failures = BTreeMap::new();
            for r in records.iter().filter(|r| !r.outcome.success) {
                let cat = r.outcome.error_category.unwrap_or(ErrorCategory::Other);
                *failures.entry(cat).or_insert(0) += 1;
                *histogram.entry(cat).or_insert(0) += 1;
                if let Some(stage) = r.outcome.failure_stage {
                    *stage_histogram.entry(stage).or_insert(0) += 1;
                }
            }
            CaseReport {
                name: case.name.clone(),
                trials,
                successes,
                accuracy: successes as f64 / trials as f64,
                mean_seconds: records.iter().map(|r| r.seconds).sum::<f64>() / trials as f64,
                failures,
                records,
            }
        })
        .collect();
    Ok(AccuracyReport {
        backend: backend.name(),
        cases: reports,
        histogram,
        stage_histogram,
    })
}
