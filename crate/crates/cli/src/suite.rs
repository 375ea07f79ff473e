//! Running a suite and summarising the outcome.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use levy_variation::mc_harness::{run_experiment, ExperimentConfig, ExperimentReport};
use thiserror::Error;

use crate::config::SuiteConfig;
use crate::render::write_report;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("no experiment named `{0}`")]
    UnknownExperiment(String),

    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub only: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Passed,
    /// Names of the failed hard checks.
    Failed(Vec<String>),
    /// The experiment could not run.
    Error(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub name: String,
    pub outcome: Outcome,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuiteSummary {
    pub out_dir: PathBuf,
    pub experiments: Vec<ExperimentOutcome>,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.experiments.iter().all(|e| e.outcome == Outcome::Passed)
    }

    pub fn exit_code(&self) -> u8 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

impl fmt::Display for SuiteSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.experiments.is_empty() {
            return writeln!(f, "0 experiments run");
        }
        let passed = self.experiments.iter().filter(|e| e.outcome == Outcome::Passed).count();
        writeln!(f, "{passed}/{} experiments passed", self.experiments.len())?;
        for e in &self.experiments {
            match &e.outcome {
                Outcome::Passed => writeln!(f, "PASS {}", e.name)?,
                Outcome::Failed(checks) => {
                    writeln!(f, "FAIL {}", e.name)?;
                    for c in checks {
                        writeln!(f, "     {c}")?;
                    }
                }
                Outcome::Error(msg) => writeln!(f, "ERROR {}: {msg}", e.name)?,
            }
        }
        Ok(())
    }
}

/// The experiments selected by `--only`, with the seed override applied.
pub fn select(cfg: &SuiteConfig, opts: &RunOptions) -> Result<Vec<ExperimentConfig>, SuiteError> {
    let mut out: Vec<ExperimentConfig> = match &opts.only {
        Some(name) => {
            let e = cfg.experiments.iter().find(|e| &e.name == name);
            vec![e.ok_or_else(|| SuiteError::UnknownExperiment(name.clone()))?.clone()]
        }
        None => cfg.experiments.clone(),
    };
    if let Some(seed) = opts.seed {
        out.iter_mut().for_each(|e| e.seed = seed);
    }
    Ok(out)
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> SuiteError + '_ {
    move |source| SuiteError::Io { path: path.to_path_buf(), source }
}

fn outcome(report: &ExperimentReport) -> Outcome {
    if report.passed {
        Outcome::Passed
    } else {
        let failed = report.failures().map(|c| format!("{} ({} = {}, observed {})", c.name, c.tolerance, c.threshold, c.observed));
        Outcome::Failed(failed.collect())
    }
}

/// Run every selected experiment, writing artifacts to
/// `<out_dir>/<experiment name>/` and a `summary.txt` at the top.
pub fn run_suite(cfg: &SuiteConfig, opts: &RunOptions) -> Result<SuiteSummary, SuiteError> {
    let out_dir = opts.out_dir.clone().unwrap_or_else(|| cfg.out_dir.clone());
    let mut summary = SuiteSummary { out_dir: out_dir.clone(), experiments: Vec::new() };
    for exp in select(cfg, opts)? {
        let dir = out_dir.join(&exp.name);
        let (outcome, files) = match run_experiment(&exp) {
            Ok(report) => {
                let files = write_report(&report, &dir, cfg.formats).map_err(io_err(&dir))?;
                (outcome(&report), files)
            }
            Err(e) => (Outcome::Error(e.to_string()), Vec::new()),
        };
        summary.experiments.push(ExperimentOutcome { name: exp.name, outcome, files });
    }
    fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
    let path = out_dir.join("summary.txt");
    fs::write(&path, summary.to_string()).map_err(io_err(&path))?;
    Ok(summary)
}
