//! Monte Carlo experiments confronting simulated variations with the
//! oracle's predictions.
//!
//! Replicas run in parallel; every reduction walks them in replica order,
//! so reports do not depend on the thread count.

mod estimators;
mod experiments;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::levy_model::LevyTriple;
use crate::numerics::stats::Estimate;
use crate::path_simulator::{HorizonMode, Jump, SamplingGrid, SimulationOptions};
use crate::regime_oracle::{RegimeVerdict, Theorem};
use crate::test_functions::TestFunction;

pub use estimators::{estimate_gamma, estimate_gamma_of, estimate_h, estimate_h_of};
pub use experiments::{
    clt_experiment, conditional_clt_experiment, joint_clt_experiment, lln_experiment, long_horizon_experiment,
    rate_experiment, rate_regression, RateFit,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Lln,
    Rate,
    Clt,
    Joint,
    Conditional,
    LongHorizon,
}

/// A test function together with the functional it enters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    #[serde(flatten)]
    pub f: TestFunction,
    /// Use `V'^n` (increments divided by `√Δ`) instead of `V^n`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub rescaled: bool,
}

impl From<TestFunction> for FunctionSpec {
    fn from(f: TestFunction) -> Self {
        FunctionSpec { f, rescaled: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Horizon {
    /// Grids `n = T/Δ` over a fixed horizon `T`.
    Fixed { t: f64 },
    /// `Δ_n = n^{-γ}`, horizon `n^{1-γ}`.
    Growing { gamma: f64, n_steps: Vec<usize> },
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon::Fixed { t: 1.0 }
    }
}

fn d_lln() -> f64 {
    0.02
}
fn d_clt() -> f64 {
    0.10
}
fn d_ks() -> f64 {
    2.0
}
fn d_slope() -> f64 {
    0.5
}
fn d_slope_tol() -> f64 {
    0.1
}
fn d_r2() -> f64 {
    0.95
}
fn d_frob() -> f64 {
    0.15
}
fn d_frac() -> f64 {
    0.95
}
fn d_long() -> f64 {
    0.05
}
fn d_budget() -> f64 {
    0.1
}

/// Hard tolerances. Every pass/fail in a report names one of these fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Terminal relative error of an LLN at the finest `Δ`.
    #[serde(default = "d_lln")]
    pub lln_rel: f64,
    /// Fraction of replicas within `lln_rel` for path-wise limits.
    #[serde(default = "d_frac")]
    pub lln_pass_fraction: f64,
    #[serde(default = "d_clt")]
    pub clt_var_rel: f64,
    /// KS distance bound as a multiple of the 5% critical value `1.36/√M`.
    #[serde(default = "d_ks")]
    pub ks_factor: f64,
    #[serde(default = "d_slope")]
    pub rate_slope: f64,
    #[serde(default = "d_slope_tol")]
    pub rate_slope_tol: f64,
    #[serde(default = "d_r2")]
    pub rate_r2_min: f64,
    #[serde(default = "d_frob")]
    pub joint_frobenius_rel: f64,
    #[serde(default = "d_long")]
    pub long_horizon_rel: f64,
    /// Centering noise as a fraction of the predicted CLT standard deviation.
    #[serde(default = "d_budget")]
    pub centering_budget: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            lln_rel: d_lln(),
            lln_pass_fraction: d_frac(),
            clt_var_rel: d_clt(),
            ks_factor: d_ks(),
            rate_slope: d_slope(),
            rate_slope_tol: d_slope_tol(),
            rate_r2_min: d_r2(),
            joint_frobenius_rel: d_frob(),
            long_horizon_rel: d_long(),
            centering_budget: d_budget(),
        }
    }
}

fn default_replicas() -> usize {
    100
}

fn default_scenarios() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: LevyTriple,
    pub functions: Vec<FunctionSpec>,
    /// Strictly decreasing step sizes (fixed horizon only).
    #[serde(default)]
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub horizon: Horizon,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub seed: u64,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub simulation: SimulationOptions,
    /// Draws for Monte Carlo centerings; by default `max(10⁶, 100·M·t/Δ)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centering_draws: Option<u64>,
    /// Jump scenarios for the conditional CLT.
    #[serde(default = "default_scenarios")]
    pub scenarios: usize,
    /// Hand-picked jump scenario for the conditional CLT.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frozen_jumps: Option<Vec<Jump>>,
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>, model: LevyTriple, functions: Vec<FunctionSpec>, checks: Vec<Check>) -> Self {
        ExperimentConfig {
            name: name.into(),
            model,
            functions,
            deltas: Vec::new(),
            horizon: Horizon::default(),
            replicas: default_replicas(),
            seed: 0,
            checks,
            tolerances: Tolerances::default(),
            simulation: SimulationOptions::default(),
            centering_draws: None,
            scenarios: default_scenarios(),
            frozen_jumps: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        if self.functions.is_empty() {
            return Err(invalid("functions", "need at least one function"));
        }
        if self.replicas < 2 {
            return Err(invalid("replicas", format!("need at least 2, got {}", self.replicas)));
        }
        if self.checks.is_empty() {
            return Err(invalid("checks", "need at least one check"));
        }
        match &self.horizon {
            Horizon::Fixed { t } => {
                if !(*t > 0.0 && t.is_finite()) {
                    return Err(invalid("horizon.t", format!("must be positive, got {t}")));
                }
                if self.deltas.is_empty() {
                    return Err(invalid("deltas", "need at least one step size"));
                }
                if self.deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
                    return Err(invalid("deltas", "must be positive"));
                }
                if self.deltas.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(invalid("deltas", "must be strictly decreasing"));
                }
                for &d in &self.deltas {
                    self.grid(d)?;
                }
            }
            Horizon::Growing { gamma, n_steps } => {
                if !(*gamma > 0.0 && *gamma < 1.0) {
                    return Err(invalid("horizon.gamma", format!("must lie in (0, 1), got {gamma}")));
                }
                if n_steps.is_empty() || n_steps.windows(2).any(|w| w[1] <= w[0]) || n_steps[0] == 0 {
                    return Err(invalid("horizon.n_steps", "must be positive and strictly increasing"));
                }
                if !self.deltas.is_empty() {
                    return Err(invalid("deltas", "the growing horizon derives its steps from n_steps"));
                }
            }
        }
        if let Some(jumps) = &self.frozen_jumps {
            let Horizon::Fixed { t } = self.horizon else {
                return Err(invalid("frozen_jumps", "only for a fixed horizon"));
            };
            if jumps.iter().any(|j| !(j.time > 0.0 && j.time <= t && j.size.is_finite() && j.size != 0.0)) {
                return Err(invalid("frozen_jumps", format!("need times in (0, {t}] and finite non-zero sizes")));
            }
        }
        if self.scenarios == 0 {
            return Err(invalid("scenarios", "need at least one"));
        }
        for (i, c) in self.tolerance_values().iter().enumerate() {
            if !(*c > 0.0 && c.is_finite()) {
                return Err(invalid("tolerances", format!("entry {i} must be positive")));
            }
        }
        Ok(())
    }

    fn tolerance_values(&self) -> [f64; 9] {
        let t = &self.tolerances;
        [t.lln_rel, t.lln_pass_fraction, t.clt_var_rel, t.ks_factor, t.rate_slope_tol, t.rate_r2_min, t.joint_frobenius_rel, t.long_horizon_rel, t.centering_budget]
    }

    pub fn horizon_mode(&self) -> HorizonMode {
        match self.horizon {
            Horizon::Fixed { .. } => HorizonMode::FixedHorizon,
            Horizon::Growing { .. } => HorizonMode::GrowingHorizon,
        }
    }

    /// Fixed-horizon grid for step `delta`.
    pub fn grid(&self, delta: f64) -> Result<SamplingGrid> {
        let Horizon::Fixed { t } = self.horizon else {
            return Err(Error::Config("horizon mode mismatch: fixed-horizon grid requested".into()));
        };
        let n = (t / delta).round();
        if n < 1.0 || ((n * delta - t) / t).abs() > 1e-9 {
            return Err(invalid("deltas", format!("{delta} does not divide the horizon {t}")));
        }
        SamplingGrid::new(delta, n as usize, HorizonMode::FixedHorizon)
    }

    /// All grids of the experiment, coarsest first.
    pub fn grids(&self) -> Result<Vec<SamplingGrid>> {
        match &self.horizon {
            Horizon::Fixed { .. } => self.deltas.iter().map(|&d| self.grid(d)).collect(),
            Horizon::Growing { gamma, n_steps } => {
                n_steps.iter().map(|&n| SamplingGrid::growing_horizon(n, *gamma)).collect()
            }
        }
    }

    pub fn centering_draws_for(&self, t: f64, delta: f64) -> u64 {
        self.centering_draws
            .unwrap_or_else(|| (1e6f64).max(100.0 * self.replicas as f64 * t / delta).ceil() as u64)
    }
}

/// A named hard or soft tolerance outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceCheck {
    /// What was checked, e.g. `clt variance |x|^0.5 T2_5i delta=0.001`.
    pub name: String,
    /// Field of [`Tolerances`] the threshold comes from.
    pub tolerance: String,
    pub observed: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Soft checks are reported but never fail the experiment.
    pub hard: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlnRow {
    pub function: String,
    pub delta: f64,
    pub n_steps: usize,
    pub horizon: f64,
    pub theorem: Theorem,
    /// Predicted slope for deterministic limits; `None` for path-wise ones.
    pub predicted: Option<f64>,
    /// Normalised terminal value across replicas.
    pub estimate: Estimate,
    /// Deterministic limits: relative error of the replica mean.
    /// Path-wise limits: mean over replicas of the terminal relative error.
    pub rel_error: f64,
    /// Mean over replicas of the terminal absolute error.
    pub mean_abs_error: f64,
    /// Mean over replicas of the sup-over-grid error.
    pub sup_error: f64,
    /// Fraction of replicas whose terminal relative error is within `lln_rel`.
    pub pass_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub function: String,
    pub delta: f64,
    pub theorem: Theorem,
    pub variant: String,
    pub predicted_variance: f64,
    pub empirical_variance: f64,
    pub variance_rel_error: f64,
    pub mean: f64,
    pub ks_distance: f64,
    pub centering: Option<Estimate>,
    pub centering_source: Option<crate::regime_oracle::CenteringSource>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointResult {
    pub delta: f64,
    pub predicted: Vec<Vec<f64>>,
    pub empirical: Vec<Vec<f64>>,
    pub frobenius_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalRow {
    pub function: String,
    pub scenario: usize,
    pub jumps: Vec<Jump>,
    pub delta: f64,
    pub predicted_variance: f64,
    pub empirical_variance: f64,
    pub variance_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: ExperimentConfig,
    pub verdicts: Vec<RegimeVerdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lln: Vec<LlnRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateFit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clt: Vec<CltRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint: Option<JointResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conditional: Vec<ConditionalRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub long_horizon: Vec<LlnRow>,
    pub checks: Vec<ToleranceCheck>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub passed: bool,
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    pub(crate) fn empty(cfg: &ExperimentConfig) -> Self {
        ExperimentReport {
            name: cfg.name.clone(),
            config: cfg.clone(),
            verdicts: Vec::new(),
            lln: Vec::new(),
            rate: None,
            clt: Vec::new(),
            joint: None,
            conditional: Vec::new(),
            long_horizon: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            passed: true,
            wall_clock_seconds: 0.0,
        }
    }

    pub(crate) fn check(&mut self, name: String, tolerance: &str, observed: f64, threshold: f64, passed: bool, hard: bool) {
        self.checks.push(ToleranceCheck { name, tolerance: tolerance.to_string(), observed, threshold, passed, hard });
    }

    pub(crate) fn finish(&mut self) {
        self.passed = self.checks.iter().all(|c| c.passed || !c.hard);
    }

    pub fn failures(&self) -> impl Iterator<Item = &ToleranceCheck> {
        self.checks.iter().filter(|c| c.hard && !c.passed)
    }

    fn absorb(&mut self, other: ExperimentReport) {
        for v in other.verdicts {
            if !self.verdicts.contains(&v) {
                self.verdicts.push(v);
            }
        }
        self.lln.extend(other.lln);
        self.rate = self.rate.take().or(other.rate);
        self.clt.extend(other.clt);
        self.joint = self.joint.take().or(other.joint);
        self.conditional.extend(other.conditional);
        self.long_horizon.extend(other.long_horizon);
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }
}

/// Run every check listed in the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let mut report = ExperimentReport::empty(cfg);
    for check in &cfg.checks {
        let part = match check {
            Check::Lln => lln_experiment(cfg)?,
            Check::Rate => rate_experiment(cfg)?,
            Check::Clt => clt_experiment(cfg)?,
            Check::Joint => joint_clt_experiment(cfg)?,
            Check::Conditional => conditional_clt_experiment(cfg)?,
            Check::LongHorizon => long_horizon_experiment(cfg)?,
        };
        report.absorb(part);
    }
    report.finish();
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
