//! Variation functionals of an increment path.
//!
//! Every functional is stored as its full partial-sum path on the grid, so
//! sup-over-grid errors can be measured. Sums use compensated accumulation.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::kahan::prefix_sums;
use crate::path_simulator::{IncrementPath, SamplingGrid};
use crate::regime_oracle::{Centering, RateNormalizer, RegimeVerdict};
use crate::test_functions::TestFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeriesKind {
    /// `Σ_{i ≤ [t/Δ]} f(Δ_i X)`.
    Vn,
    /// `Σ_{i ≤ [t/Δ]} f(Δ_i X / √Δ)`.
    VnPrime,
    /// `Σ_{i ≤ [nt]} f(Δ_i X)`, `t ∈ [0, 1]`.
    VnBar,
    VnBarPrime,
    PiN,
    PiNTrunc,
    /// `Y_{Δ[t/Δ]}` for a process `Y`.
    Discretized,
}

impl SeriesKind {
    pub fn is_bar(self) -> bool {
        matches!(self, SeriesKind::VnBar | SeriesKind::VnBarPrime)
    }

    pub fn is_rescaled(self) -> bool {
        matches!(self, SeriesKind::VnPrime | SeriesKind::VnBarPrime)
    }

    /// Same underlying sum (up to the time axis).
    fn family(self) -> u8 {
        match self {
            SeriesKind::Vn | SeriesKind::VnBar | SeriesKind::PiN | SeriesKind::PiNTrunc => 0,
            SeriesKind::VnPrime | SeriesKind::VnBarPrime => 1,
            SeriesKind::Discretized => 2,
        }
    }
}

/// What [`center_and_scale`] did to a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub delta_exponent: f64,
    pub horizon_exponent: f64,
    /// Multiplier from the non-explicit normaliser, 1 when absent.
    pub rate_factor: f64,
    pub centering: Centering,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationSeries {
    /// Time of each entry: `iΔ` or, for bar kinds, `i/n`.
    pub times: Vec<f64>,
    /// Value after `i` steps, `i = 1..=n`.
    pub values: Vec<f64>,
    /// Value before the first step.
    pub initial: f64,
    pub kind: SeriesKind,
    pub f_used: Option<TestFunction>,
    pub delta: f64,
    pub normalization: Option<Normalization>,
}

impl VariationSeries {
    fn from_terms(path: &IncrementPath, kind: SeriesKind, f: TestFunction, terms: impl Iterator<Item = f64>) -> Self {
        let grid = &path.grid;
        let n = grid.n_steps;
        let times = if kind.is_bar() {
            (1..=n).map(|i| i as f64 / n as f64).collect()
        } else {
            (0..n).map(|i| grid.time(i)).collect()
        };
        VariationSeries {
            times,
            values: prefix_sums(terms),
            initial: 0.0,
            kind,
            f_used: Some(f),
            delta: grid.delta,
            normalization: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Horizon `nΔ` of the underlying path.
    pub fn horizon(&self) -> f64 {
        self.delta * self.len() as f64
    }

    /// Number of steps included at time `t` (`[t/Δ]`, or `[nt]`).
    pub fn steps_until(&self, t: f64) -> usize {
        if t <= 0.0 {
            return 0;
        }
        let unit = if self.kind.is_bar() { 1.0 / self.len() as f64 } else { self.delta };
        let k = (t / unit * (1.0 + 4.0 * f64::EPSILON)).floor();
        (k as usize).min(self.len())
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match self.steps_until(t) {
            0 => self.initial,
            k => self.values[k - 1],
        }
    }

    pub fn terminal(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.initial)
    }

    /// `(time, value)` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "time,value")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(w, "{t:.17e},{v:.17e}")?;
        }
        Ok(())
    }
}

pub fn v_n(path: &IncrementPath, f: &TestFunction) -> VariationSeries {
    VariationSeries::from_terms(path, SeriesKind::Vn, *f, path.increments.iter().map(|&x| f.eval(x)))
}

pub fn v_prime_n(path: &IncrementPath, f: &TestFunction) -> VariationSeries {
    let s = path.grid.delta.sqrt();
    VariationSeries::from_terms(path, SeriesKind::VnPrime, *f, path.increments.iter().map(|&x| f.eval(x / s)))
}

pub fn v_bar_n(path: &IncrementPath, f: &TestFunction) -> VariationSeries {
    VariationSeries { kind: SeriesKind::VnBar, ..bar_times(v_n(path, f)) }
}

pub fn v_bar_prime_n(path: &IncrementPath, f: &TestFunction) -> VariationSeries {
    VariationSeries { kind: SeriesKind::VnBarPrime, ..bar_times(v_prime_n(path, f)) }
}

fn bar_times(mut s: VariationSeries) -> VariationSeries {
    let n = s.len() as f64;
    s.times = (1..=s.len()).map(|i| i as f64 / n).collect();
    s
}

/// Realised `r`-variation.
pub fn pi_n(path: &IncrementPath, r: f64) -> Result<VariationSeries> {
    let f = TestFunction::power_abs(r)?;
    Ok(VariationSeries { kind: SeriesKind::PiN, ..v_n(path, &f) })
}

/// Realised `r`-variation over increments with `|Δ_i X| ≤ a` (`a` may be
/// infinite).
pub fn pi_n_trunc(path: &IncrementPath, r: f64, a: f64) -> Result<VariationSeries> {
    let f = TestFunction::truncated_power(r, a)?;
    Ok(VariationSeries { kind: SeriesKind::PiNTrunc, ..v_n(path, &f) })
}

/// `Y^{(n)}_t = Y_{Δ[t/Δ]}` on `grid`.
pub fn discretize<P: Fn(f64) -> f64>(process: P, grid: &SamplingGrid) -> VariationSeries {
    let times: Vec<f64> = (0..grid.n_steps).map(|i| grid.time(i)).collect();
    VariationSeries {
        values: times.iter().map(|&t| process(t)).collect(),
        times,
        initial: process(0.0),
        kind: SeriesKind::Discretized,
        f_used: None,
        delta: grid.delta,
        normalization: None,
    }
}

/// Numbers a verdict may need but cannot compute itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct CenteringInputs<'a> {
    /// Per-step value for an `HCenter` centering.
    pub per_step: Option<f64>,
    /// `H_Δ(g)` or `Γ_Δ(g)` for a non-explicit normaliser.
    pub normalizer: Option<f64>,
    /// Path whose jump ledger forms `V(f)^{(n)}`.
    pub path: Option<&'a IncrementPath>,
}

/// `Δ^a · T^h · κ · (series − centering)` per the verdict.
pub fn center_and_scale(series: &VariationSeries, verdict: &RegimeVerdict, inputs: &CenteringInputs) -> Result<VariationSeries> {
    if series.normalization.is_some() {
        return Err(Error::Config("series is already normalised".into()));
    }
    if series.kind.family() != verdict.series.family() || series.kind.is_bar() != verdict.series.is_bar() {
        return Err(Error::Config(format!(
            "verdict is about {:?}, series is {:?}",
            verdict.series, series.kind
        )));
    }
    if !verdict.is_covered() {
        return Err(Error::Inadmissible(verdict.reason.clone().unwrap_or_default()));
    }
    let delta = series.delta;
    let rate_factor = match verdict.normalizer {
        RateNormalizer::None => 1.0,
        RateNormalizer::InverseH { .. } => {
            let h = inputs.normalizer.ok_or_else(|| Error::MissingCentering("H_delta for the rate".into()))?;
            1.0 / h
        }
        RateNormalizer::InverseSqrtGamma { .. } => {
            let g = inputs.normalizer.ok_or_else(|| Error::MissingCentering("Gamma_delta for the rate".into()))?;
            1.0 / g.sqrt()
        }
    };
    if !(rate_factor.is_finite() && rate_factor > 0.0) {
        return Err(invalid("normalizer", format!("gives rate factor {rate_factor}")));
    }
    let scale = delta.powf(verdict.normalization_exponent) * series.horizon().powf(verdict.horizon_exponent) * rate_factor;
    let per_step = match &verdict.centering {
        Centering::None | Centering::JumpFunctional { .. } => 0.0,
        Centering::HCenter { .. } => inputs
            .per_step
            .ok_or_else(|| Error::MissingCentering(format!("{:?} needs an H_delta value", verdict.theorem)))?,
        Centering::DeterministicSlope { value, delta_power } => value * delta.powf(*delta_power),
        Centering::GaussianExpectation { value } => *value,
    };
    let mut centered: Vec<f64> = series
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v - (i + 1) as f64 * per_step)
        .collect();
    if let Centering::JumpFunctional { drift_rate } = verdict.centering {
        let path = inputs
            .path
            .ok_or_else(|| Error::MissingCentering("jump functional needs the path".into()))?;
        let f = series
            .f_used
            .ok_or_else(|| Error::MissingCentering("series carries no function".into()))?;
        if path.grid.n_steps != series.len() || path.grid.delta != delta {
            return Err(Error::PathMismatch("centering path differs from the series' grid".into()));
        }
        let mut jumps = path.big_jumps.iter().peekable();
        let mut acc = crate::numerics::NeumaierSum::new();
        for (i, v) in centered.iter_mut().enumerate() {
            let t = path.grid.time(i);
            while let Some(j) = jumps.next_if(|j| j.time <= t) {
                acc.add(f.eval(j.size));
            }
            *v -= acc.value() + drift_rate * t;
        }
    }
    Ok(VariationSeries {
        values: centered.into_iter().map(|v| scale * v).collect(),
        initial: scale * series.initial,
        normalization: Some(Normalization {
            delta_exponent: verdict.normalization_exponent,
            horizon_exponent: verdict.horizon_exponent,
            rate_factor,
            centering: verdict.centering.clone(),
        }),
        ..series.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::{JumpLaw, JumpMeasure, LevyTriple};
    use crate::path_simulator::{HorizonMode, Jump, PathSampler, SimulationOptions};
    use crate::regime_oracle::{classify, clt_verdicts, Theorem};

    fn path_from(incs: &[f64], delta: f64) -> IncrementPath {
        // zero-drift pure-jump model so the path is exactly the given jumps
        let t = LevyTriple::new(0.0, 0.0, JumpMeasure::compound_poisson(1.0, JumpLaw::symmetric_pair(1.0).unwrap()).unwrap()).unwrap();
        let grid = SamplingGrid::new(delta, incs.len(), HorizonMode::FixedHorizon).unwrap();
        let sampler = PathSampler::new(&t, SimulationOptions::default()).unwrap();
        let jumps = incs
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(i, &x)| Jump { time: (i as f64 + 0.5) * delta, size: x })
            .collect();
        sampler.sample_with_jumps(&grid, 0, 0, jumps)
    }

    #[test]
    fn v_n_examples() {
        let p = path_from(&[1.0, -2.0, 3.0], 0.1);
        assert_eq!(p.increments, vec![1.0, -2.0, 3.0]);
        let sq = TestFunction::power_abs(2.0).unwrap();
        assert_eq!(v_n(&p, &sq).value_at(0.3), 14.0);
        let tr = TestFunction::truncated_power(2.0, 2.0).unwrap();
        assert_eq!(v_n(&p, &tr).value_at(0.3), 5.0);
        assert_eq!(v_n(&p, &sq).value_at(0.05), 0.0);
    }

    #[test]
    fn v_prime_examples() {
        let p = path_from(&[0.2], 0.04);
        let abs = TestFunction::power_abs(1.0).unwrap();
        assert!((v_prime_n(&p, &abs).terminal() - 1.0).abs() < 1e-15);
        let z = path_from(&[0.0; 5], 0.01);
        let bounded = TestFunction::phi(0.0).unwrap();
        assert_eq!(v_prime_n(&z, &bounded).value_at(0.03), 3.0);
    }

    #[test]
    fn bar_examples() {
        let p = path_from(&[1.0, 2.0, 3.0, 4.0], 0.25);
        let abs = TestFunction::power_abs(1.0).unwrap();
        let bar = v_bar_n(&p, &abs);
        assert_eq!(bar.value_at(0.5), 3.0);
        assert_eq!(bar.value_at(0.0), 0.0);
        assert_eq!(bar.value_at(1.0), v_n(&p, &abs).value_at(p.grid.horizon()));
    }

    #[test]
    fn truncation_examples() {
        let p = path_from(&[0.5, -1.5, 2.5, 0.1], 0.1);
        let full = pi_n(&p, 1.5).unwrap();
        assert_eq!(pi_n_trunc(&p, 1.5, f64::INFINITY).unwrap().values, full.values);
        let mut prev = 0.0;
        for a in [0.05, 0.2, 1.0, 2.0, 3.0] {
            let v = pi_n_trunc(&p, 1.5, a).unwrap().terminal();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn discretize_examples() {
        let grid = SamplingGrid::new(0.5, 4, HorizonMode::FixedHorizon).unwrap();
        let id = discretize(|t| t, &grid);
        assert_eq!(id.value_at(0.7), 0.5);
        assert_eq!(id.value_at(1.0), 1.0);
        let jump = discretize(|t| if t >= 0.3 { 1.0 } else { 0.0 }, &grid);
        assert_eq!(jump.value_at(0.4), 0.0);
    }

    #[test]
    fn center_and_scale_examples() {
        let bm = LevyTriple::brownian(1.0).unwrap();
        let grid = SamplingGrid::fixed_horizon(1.0, 1000).unwrap();
        let p = crate::path_simulator::sample_path(&bm, &grid, 3).unwrap();

        let sq = TestFunction::power_abs(2.0).unwrap();
        let bm2 = LevyTriple::brownian(1.0).unwrap();
        let v = crate::regime_oracle::applicable_lln(&bm2, &sq, HorizonMode::FixedHorizon)
            .unwrap()
            .into_iter()
            .find(|v| v.theorem == Theorem::T2_2i)
            .unwrap();
        let s = v_n(&p, &sq);
        let out = center_and_scale(&s, &v, &CenteringInputs::default()).unwrap();
        assert_eq!(out.values, s.values);

        let abs = TestFunction::power_abs(1.0).unwrap();
        let v = classify(&bm, &abs, HorizonMode::FixedHorizon).unwrap();
        assert_eq!(v.theorem, Theorem::T2_2i);
        let s = v_n(&p, &abs);
        let out = center_and_scale(&s, &v, &CenteringInputs::default()).unwrap();
        assert!((out.terminal() - grid.delta.sqrt() * s.terminal()).abs() < 1e-12);
    }

    #[test]
    fn jump_functional_centering() {
        let t = LevyTriple::new(0.0, 1.0, JumpMeasure::compound_poisson(1.0, JumpLaw::symmetric_pair(1.0).unwrap()).unwrap()).unwrap();
        let grid = SamplingGrid::fixed_horizon(1.0, 100).unwrap();
        let sampler = PathSampler::new(&t, SimulationOptions::default()).unwrap();
        let p = sampler.sample_with_jumps(&grid, 1, 0, vec![Jump { time: 0.305, size: 1.0 }]);
        let f = TestFunction::square_near_zero(2.0).unwrap();
        let v = clt_verdicts(&t, &f, SeriesKind::Vn).unwrap().into_iter().find(|v| v.theorem == Theorem::T2_6c).unwrap();
        let s = v_n(&p, &f);
        let out = center_and_scale(&s, &v, &CenteringInputs { path: Some(&p), ..Default::default() }).unwrap();
        let k = 40;
        let t40 = grid.time(k - 1);
        let expect = (s.values[k - 1] - 1.0 - t40) / grid.delta.sqrt();
        assert!((out.values[k - 1] - expect).abs() < 1e-12);
        let k = 30;
        let expect = (s.values[k - 1] - grid.time(k - 1)) / grid.delta.sqrt();
        assert!((out.values[k - 1] - expect).abs() < 1e-12);
        assert!(matches!(
            center_and_scale(&s, &v, &CenteringInputs::default()),
            Err(Error::MissingCentering(_))
        ));
    }

    #[test]
    fn h_centering_requires_input() {
        let bm = LevyTriple::brownian(1.0).unwrap();
        let grid = SamplingGrid::fixed_horizon(1.0, 10).unwrap();
        let p = crate::path_simulator::sample_path(&bm, &grid, 3).unwrap();
        let f = TestFunction::power_abs(0.5).unwrap();
        let v = clt_verdicts(&bm, &f, SeriesKind::Vn).unwrap().remove(0);
        let s = v_n(&p, &f);
        assert!(matches!(center_and_scale(&s, &v, &CenteringInputs::default()), Err(Error::MissingCentering(_))));
        let out = center_and_scale(&s, &v, &CenteringInputs { per_step: Some(0.1), ..Default::default() }).unwrap();
        let expect = grid.delta.powf(0.25) * (s.terminal() - 10.0 * 0.1);
        assert!((out.terminal() - expect).abs() < 1e-12);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let p = path_from(&[1.0, 2.0], 0.5);
        let mut buf = Vec::new();
        v_n(&p, &TestFunction::power_abs(1.0).unwrap()).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("time,value\n"));
    }
}
