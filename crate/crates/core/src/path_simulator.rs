//! Increment paths `Δ^n_i X` on a regular grid.
//!
//! A path is assembled from four components: the drift, the Brownian part,
//! the (Gaussian substitute for the) compensated small jumps, and the
//! explicitly simulated big jumps, which are also kept in a ledger of
//! `(time, size)` pairs. Every component draws from its own counter-based
//! stream (see [`crate::rng`]), so the Brownian part can be redrawn with the
//! jumps held fixed.

use std::io::{self, Read, Write};

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::levy_model::{JumpLaw, JumpMeasure, LevyTriple};
use crate::rng::{stream, StreamRng, StreamTag};
use crate::test_functions::TestFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HorizonMode {
    /// `T = nΔ` stays fixed while `Δ` shrinks.
    #[default]
    FixedHorizon,
    /// `T_n = nΔ_n → ∞`.
    GrowingHorizon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub delta: f64,
    pub n_steps: usize,
    pub horizon_mode: HorizonMode,
}

impl SamplingGrid {
    pub fn new(delta: f64, n_steps: usize, horizon_mode: HorizonMode) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("delta", format!("must be positive, got {delta}")));
        }
        if n_steps == 0 {
            return Err(invalid("n_steps", "must be at least 1"));
        }
        Ok(Self { delta, n_steps, horizon_mode })
    }

    /// `n` steps of size `horizon / n`.
    pub fn fixed_horizon(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid("horizon", format!("must be positive, got {horizon}")));
        }
        Self::new(horizon / n_steps as f64, n_steps, HorizonMode::FixedHorizon)
    }

    /// `n` steps of size `n^{-γ}`, so `T_n = n^{1-γ}` grows for `γ < 1`.
    pub fn growing_horizon(n_steps: usize, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(invalid("gamma", format!("must lie in (0, 1), got {gamma}")));
        }
        Self::new((n_steps as f64).powf(-gamma), n_steps, HorizonMode::GrowingHorizon)
    }

    pub fn horizon(&self) -> f64 {
        self.delta * self.n_steps as f64
    }

    /// Grid time of the end of step `i` (0-based).
    pub fn time(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.delta
    }

    /// `[t/Δ]`, robust to `t` computed as a multiple of `Δ` in floating point.
    pub fn steps_until(&self, t: f64) -> usize {
        if t <= 0.0 {
            return 0;
        }
        let k = (t / self.delta * (1.0 + 4.0 * f64::EPSILON)).floor();
        (k as usize).min(self.n_steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SmallJumpMode {
    /// Jumps below ε replaced by a centred Gaussian of matching variance.
    #[default]
    GaussianApprox,
    /// Jumps below ε replaced by their mean (only for α < 1).
    DriftCorrectedTruncation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    /// Increments drawn step by step.
    #[default]
    Independent,
    /// Brownian increments built by bridge bisection from the odd part of
    /// `n`, so grids `Δ, Δ/2, Δ/4, …` over one horizon share one path.
    Coupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct SimulationOptions {
    #[serde(default)]
    pub small_jumps: SmallJumpMode,
    /// Ledger threshold ε for power-law measures; chosen automatically when
    /// absent.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub refinement: Refinement,
}

/// Minimum `σ(ε)/ε` for the Gaussian small-jump substitute.
pub const MIN_SMALL_JUMP_RATIO: f64 = 5.0;
/// `σ(ε)/ε` aimed for when ε is chosen automatically.
pub const TARGET_SMALL_JUMP_RATIO: f64 = 100.0;
/// Cap on the big-jump intensity when ε is chosen automatically.
pub const MAX_BIG_JUMP_RATE: f64 = 1.0e5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub replica: u64,
    /// Seed of the Brownian stream; equals `seed` unless resampled.
    pub gauss_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub time: f64,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum SizeSampler {
    None,
    Law(JumpLaw),
    /// `|x|` with density ∝ `|x|^{-1-α}` on `(ε, cutoff]`, by inversion.
    PowerTail { alpha: f64, lo_pow: f64, hi_pow: f64, symmetric: bool },
}

impl SizeSampler {
    fn sample(&self, rng: &mut StreamRng) -> f64 {
        match self {
            SizeSampler::None => 0.0,
            SizeSampler::Law(JumpLaw::PointMasses { atoms }) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(v, w) in atoms {
                    acc += w;
                    if u < acc {
                        return v;
                    }
                }
                atoms[atoms.len() - 1].0
            }
            SizeSampler::Law(JumpLaw::Gaussian { mean, sd }) => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sd * z
            }
            SizeSampler::Law(JumpLaw::Uniform { lo, hi }) => lo + (hi - lo) * rng.random::<f64>(),
            &SizeSampler::PowerTail { alpha, lo_pow, hi_pow, symmetric } => {
                let u: f64 = rng.random();
                let magnitude = (lo_pow - u * (lo_pow - hi_pow)).powf(-1.0 / alpha);
                if symmetric && rng.random::<bool>() {
                    -magnitude
                } else {
                    magnitude
                }
            }
        }
    }
}

/// Everything about a model that does not depend on the grid or the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSampler {
    triple: LevyTriple,
    options: SimulationOptions,
    /// Ledger threshold; `None` when every jump is ledgered.
    epsilon: Option<f64>,
    big_jump_rate: f64,
    sizes: SizeSampler,
    /// Variance per unit time of the Gaussian small-jump substitute.
    small_jump_var: f64,
    /// Drift per unit time once the compensator of the ledgered jumps is
    /// folded in.
    effective_drift: f64,
}

impl PathSampler {
    pub fn new(triple: &LevyTriple, options: SimulationOptions) -> Result<Self> {
        triple.validate()?;
        let base = PathSampler {
            triple: triple.clone(),
            options,
            epsilon: None,
            big_jump_rate: 0.0,
            sizes: SizeSampler::None,
            small_jump_var: 0.0,
            effective_drift: triple.drift_b,
        };
        match &triple.jump_measure {
            JumpMeasure::NoJumps => Ok(base),
            JumpMeasure::CompoundPoisson { intensity, jump_law } => {
                let comp = triple.jump_measure.compensator_mean(0.0)?;
                Ok(PathSampler {
                    big_jump_rate: *intensity,
                    sizes: SizeSampler::Law(jump_law.clone()),
                    effective_drift: triple.drift_b - comp,
                    ..base
                })
            }
            &JumpMeasure::PowerLawSmallJumps { alpha, scale, cutoff, symmetric } => {
                let sides = if symmetric { 2.0 } else { 1.0 };
                let ratio = |eps: f64| (sides * scale / (2.0 - alpha)).sqrt() * eps.powf(-alpha / 2.0);
                let eps = match options.epsilon {
                    Some(e) if e > 0.0 && e.is_finite() => e.min(cutoff),
                    Some(e) => return Err(invalid("epsilon", format!("must be positive, got {e}"))),
                    None => {
                        let by_ratio = ((sides * scale / (2.0 - alpha)).sqrt() / TARGET_SMALL_JUMP_RATIO)
                            .powf(2.0 / alpha);
                        let by_rate = (alpha * MAX_BIG_JUMP_RATE / (sides * scale) + cutoff.powf(-alpha))
                            .powf(-1.0 / alpha);
                        by_ratio.max(by_rate).min(cutoff)
                    }
                };
                let jm = &triple.jump_measure;
                let small_jump_var = match options.small_jumps {
                    SmallJumpMode::GaussianApprox => {
                        let r = ratio(eps);
                        if r < MIN_SMALL_JUMP_RATIO {
                            return Err(Error::SmallJumpApproximation(format!(
                                "sigma(eps)/eps = {r:.3} < {MIN_SMALL_JUMP_RATIO} at eps = {eps:e}; \
                                 choose a smaller epsilon"
                            )));
                        }
                        jm.small_power_moment(eps, 2.0)?
                    }
                    SmallJumpMode::DriftCorrectedTruncation => {
                        if alpha >= 1.0 {
                            return Err(Error::SmallJumpApproximation(format!(
                                "drift-corrected truncation needs alpha < 1, got {alpha}"
                            )));
                        }
                        0.0
                    }
                };
                // Both modes keep the jumps below ε at their mean, which the
                // compensator over |x| ≤ ε cancels.
                let effective_drift = triple.drift_b - jm.compensator_mean(eps)?;
                Ok(PathSampler {
                    epsilon: Some(eps),
                    big_jump_rate: jm.mass_above(eps)?,
                    sizes: SizeSampler::PowerTail {
                        alpha,
                        lo_pow: eps.powf(-alpha),
                        hi_pow: cutoff.powf(-alpha),
                        symmetric,
                    },
                    small_jump_var,
                    effective_drift,
                    ..base
                })
            }
        }
    }

    pub fn triple(&self) -> &LevyTriple {
        &self.triple
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn big_jump_rate(&self) -> f64 {
        self.big_jump_rate
    }

    pub fn effective_drift(&self) -> f64 {
        self.effective_drift
    }

    pub fn small_jump_var(&self) -> f64 {
        self.small_jump_var
    }

    /// Jump scenario on `(0, horizon]`, independent of the grid.
    pub fn jump_scenario(&self, horizon: f64, seed: u64, replica: u64) -> Vec<Jump> {
        if self.big_jump_rate == 0.0 {
            return Vec::new();
        }
        let mut rng = stream(seed, replica, StreamTag::Jumps);
        let count = poisson(self.big_jump_rate * horizon, &mut rng);
        let mut times: Vec<f64> = (0..count)
            .map(|_| horizon * (1.0 - rng.random::<f64>()))
            .collect();
        times.sort_by(f64::total_cmp);
        times
            .into_iter()
            .map(|time| Jump { time, size: self.sizes.sample(&mut rng) })
            .collect()
    }

    pub fn sample(&self, grid: &SamplingGrid, seed: u64, replica: u64) -> IncrementPath {
        let jumps = self.jump_scenario(grid.horizon(), seed, replica);
        self.assemble(grid, SeedRecord { seed, replica, gauss_seed: seed }, jumps)
    }

    /// Build a path around a given jump scenario (for frozen-jump checks
    /// with hand-picked jumps).
    pub fn sample_with_jumps(&self, grid: &SamplingGrid, seed: u64, replica: u64, jumps: Vec<Jump>) -> IncrementPath {
        self.assemble(grid, SeedRecord { seed, replica, gauss_seed: seed }, jumps)
    }

    fn assemble(&self, grid: &SamplingGrid, seed: SeedRecord, mut big_jumps: Vec<Jump>) -> IncrementPath {
        let n = grid.n_steps;
        big_jumps.retain(|j| j.time > 0.0 && j.time <= grid.horizon());
        let mut big_jump_part = vec![0.0; n];
        for j in &big_jumps {
            big_jump_part[step_of(grid, j.time)] += j.size;
        }
        let gauss_part = brownian_increments(
            self.triple.gauss_var_c,
            grid,
            self.options.refinement,
            seed.gauss_seed,
            seed.replica,
            StreamTag::Gaussian,
        );
        let small_jump_part = brownian_increments(
            self.small_jump_var,
            grid,
            self.options.refinement,
            seed.seed,
            seed.replica,
            StreamTag::SmallJumps,
        );
        let drift_per_step = self.effective_drift * grid.delta;
        let increments = combine(drift_per_step, &gauss_part, &small_jump_part, &big_jump_part);
        IncrementPath {
            grid: *grid,
            triple: self.triple.clone(),
            options: self.options,
            epsilon: self.epsilon,
            increments,
            gauss_part,
            small_jump_part,
            big_jump_part,
            big_jumps,
            drift_per_step,
            seed,
        }
    }

    /// One draw of `X_t`, for expectation estimates.
    pub fn sample_single(&self, t: f64, rng: &mut StreamRng) -> f64 {
        let mut x = self.effective_drift * t;
        if self.triple.gauss_var_c > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            x += (self.triple.gauss_var_c * t).sqrt() * z;
        }
        if self.small_jump_var > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            x += (self.small_jump_var * t).sqrt() * z;
        }
        if self.big_jump_rate > 0.0 {
            let count = poisson(self.big_jump_rate * t, rng);
            for _ in 0..count {
                x += self.sizes.sample(rng);
            }
        }
        x
    }
}

fn poisson(mean: f64, rng: &mut StreamRng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("positive finite Poisson mean");
    let k: f64 = d.sample(rng);
    k as u64
}

/// Index of the step `((i−1)Δ, iΔ]` containing `t > 0`.
fn step_of(grid: &SamplingGrid, t: f64) -> usize {
    let k = (t / grid.delta).ceil() as usize;
    k.clamp(1, grid.n_steps) - 1
}

fn combine(drift: f64, gauss: &[f64], small: &[f64], big: &[f64]) -> Vec<f64> {
    gauss
        .iter()
        .zip(small)
        .zip(big)
        .map(|((g, s), b)| drift + g + s + b)
        .collect()
}

/// Increments of a Brownian motion with variance `var` per unit time.
fn brownian_increments(
    var: f64,
    grid: &SamplingGrid,
    refinement: Refinement,
    seed: u64,
    replica: u64,
    tag: fn(u32) -> StreamTag,
) -> Vec<f64> {
    let n = grid.n_steps;
    if var == 0.0 {
        return vec![0.0; n];
    }
    match refinement {
        Refinement::Independent => {
            let mut rng = stream(seed, replica, tag(0));
            let sd = (var * grid.delta).sqrt();
            (0..n)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    sd * z
                })
                .collect()
        }
        Refinement::Coupled => {
            let levels = n.trailing_zeros();
            let base = n >> levels;
            let mut span = grid.horizon() / base as f64;
            let mut rng = stream(seed, replica, tag(0));
            let sd = (var * span).sqrt();
            let mut incs: Vec<f64> = (0..base)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    sd * z
                })
                .collect();
            for level in 1..=levels {
                let mut rng = stream(seed, replica, tag(level));
                // midpoint of a bridge over `span`: conditional sd √(var·span/4)
                let bridge_sd = (var * span / 4.0).sqrt();
                let mut next = Vec::with_capacity(incs.len() * 2);
                for d in incs {
                    let z: f64 = rng.sample(StandardNormal);
                    let dev = bridge_sd * z;
                    next.push(0.5 * d + dev);
                    next.push(0.5 * d - dev);
                }
                incs = next;
                span *= 0.5;
            }
            incs
        }
    }
}

/// A simulated increment path with its component decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementPath {
    pub grid: SamplingGrid,
    pub triple: LevyTriple,
    pub options: SimulationOptions,
    /// Ledger threshold ε; `None` when every jump is in the ledger.
    pub epsilon: Option<f64>,
    pub increments: Vec<f64>,
    pub gauss_part: Vec<f64>,
    pub small_jump_part: Vec<f64>,
    /// Per-step sum of the ledgered jumps.
    pub big_jump_part: Vec<f64>,
    pub big_jumps: Vec<Jump>,
    pub drift_per_step: f64,
    pub seed: SeedRecord,
}

/// `Σ_{s ≤ t} f(ΔX_s)` over the ledger, with a bound on what the jumps
/// below the ledger threshold could add.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpFunctionalValue {
    pub value: f64,
    pub neglected_bound: f64,
}

impl IncrementPath {
    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// `X_T`, the sum of all increments.
    pub fn endpoint(&self) -> f64 {
        crate::numerics::kahan::compensated_sum(&self.increments)
    }

    /// `X_{iΔ}` for `i = 0..=n`.
    pub fn levels(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() + 1);
        out.push(0.0);
        out.extend(crate::numerics::kahan::prefix_sums(self.increments.iter().copied()));
        out
    }

    pub fn jump_functional(&self, f: &TestFunction, t: f64) -> Result<JumpFunctionalValue> {
        let r = f
            .class_r()
            .ok_or_else(|| Error::Inadmissible(format!("{f} has no growth order at 0")))?;
        if !self.triple.jump_measure.in_index_set(r) {
            return Err(Error::NotInIndexSet(r));
        }
        let value = self
            .big_jumps
            .iter()
            .take_while(|j| j.time <= t)
            .map(|j| f.eval(j.size))
            .sum::<crate::numerics::NeumaierSum>()
            .value();
        let neglected_bound = match self.epsilon {
            None => 0.0,
            Some(eps) => {
                let c = f.dominating_constant(eps).unwrap_or(f64::INFINITY);
                c * t.max(0.0) * self.triple.jump_measure.small_power_moment(eps, r)?
            }
        };
        Ok(JumpFunctionalValue { value, neglected_bound })
    }

    /// Redraw the Brownian component from `gauss_seed`, keeping drift,
    /// small-jump part and jump ledger.
    pub fn resample_gaussian(&self, triple: &LevyTriple, grid: &SamplingGrid, gauss_seed: u64) -> Result<IncrementPath> {
        if triple != &self.triple {
            return Err(Error::PathMismatch("characteristics differ from the path's".into()));
        }
        if grid != &self.grid {
            return Err(Error::PathMismatch(format!(
                "grid (delta {}, n {}) differs from the path's (delta {}, n {})",
                grid.delta, grid.n_steps, self.grid.delta, self.grid.n_steps
            )));
        }
        let gauss_part = brownian_increments(
            triple.gauss_var_c,
            grid,
            self.options.refinement,
            gauss_seed,
            self.seed.replica,
            StreamTag::Gaussian,
        );
        let increments = combine(self.drift_per_step, &gauss_part, &self.small_jump_part, &self.big_jump_part);
        Ok(IncrementPath {
            gauss_part,
            increments,
            seed: SeedRecord { gauss_seed, ..self.seed },
            ..self.clone()
        })
    }

    const MAGIC: &'static [u8; 8] = b"LVYPATH1";

    /// Little-endian dump: magic, `delta: f64`, `n: u64`, horizon mode
    /// `u8`, `seed, replica, gauss_seed: u64`, `drift_per_step: f64`, then
    /// the four `n`-long `f64` arrays (increments, gauss, small jumps, big
    /// jumps), `jump_count: u64` and `(time, size)` `f64` pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(Self::MAGIC)?;
        w.write_all(&self.grid.delta.to_le_bytes())?;
        w.write_all(&(self.grid.n_steps as u64).to_le_bytes())?;
        w.write_all(&[match self.grid.horizon_mode {
            HorizonMode::FixedHorizon => 0u8,
            HorizonMode::GrowingHorizon => 1u8,
        }])?;
        for v in [self.seed.seed, self.seed.replica, self.seed.gauss_seed] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.drift_per_step.to_le_bytes())?;
        for arr in [&self.increments, &self.gauss_part, &self.small_jump_part, &self.big_jump_part] {
            for v in arr.iter() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.write_all(&(self.big_jumps.len() as u64).to_le_bytes())?;
        for j in &self.big_jumps {
            w.write_all(&j.time.to_le_bytes())?;
            w.write_all(&j.size.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Decoded binary dump (the model itself is not part of the layout).
#[derive(Debug, Clone, PartialEq)]
pub struct PathDump {
    pub grid: SamplingGrid,
    pub seed: SeedRecord,
    pub drift_per_step: f64,
    pub increments: Vec<f64>,
    pub gauss_part: Vec<f64>,
    pub small_jump_part: Vec<f64>,
    pub big_jump_part: Vec<f64>,
    pub big_jumps: Vec<Jump>,
}

impl PathDump {
    pub fn read_binary<R: Read>(mut r: R) -> io::Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != IncrementPath::MAGIC {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "not a path dump"));
        }
        let mut b8 = [0u8; 8];
        let mut f = |r: &mut R| -> io::Result<[u8; 8]> {
            r.read_exact(&mut b8)?;
            Ok(b8)
        };
        let delta = f64::from_le_bytes(f(&mut r)?);
        let n = u64::from_le_bytes(f(&mut r)?) as usize;
        let mut mode = [0u8; 1];
        r.read_exact(&mut mode)?;
        let horizon_mode = match mode[0] {
            0 => HorizonMode::FixedHorizon,
            1 => HorizonMode::GrowingHorizon,
            m => return Err(io::Error::new(io::ErrorKind::InvalidData, format!("horizon mode {m}"))),
        };
        let seed = u64::from_le_bytes(f(&mut r)?);
        let replica = u64::from_le_bytes(f(&mut r)?);
        let gauss_seed = u64::from_le_bytes(f(&mut r)?);
        let drift_per_step = f64::from_le_bytes(f(&mut r)?);
        let mut arrays = Vec::with_capacity(4);
        for _ in 0..4 {
            let mut a = Vec::with_capacity(n);
            for _ in 0..n {
                a.push(f64::from_le_bytes(f(&mut r)?));
            }
            arrays.push(a);
        }
        let count = u64::from_le_bytes(f(&mut r)?) as usize;
        let mut big_jumps = Vec::with_capacity(count);
        for _ in 0..count {
            let time = f64::from_le_bytes(f(&mut r)?);
            let size = f64::from_le_bytes(f(&mut r)?);
            big_jumps.push(Jump { time, size });
        }
        let big_jump_part = arrays.pop().unwrap();
        let small_jump_part = arrays.pop().unwrap();
        let gauss_part = arrays.pop().unwrap();
        let increments = arrays.pop().unwrap();
        Ok(PathDump {
            grid: SamplingGrid { delta, n_steps: n, horizon_mode },
            seed: SeedRecord { seed, replica, gauss_seed },
            drift_per_step,
            increments,
            gauss_part,
            small_jump_part,
            big_jump_part,
            big_jumps,
        })
    }
}

/// Sample with default options (independent increments, automatic ε).
pub fn sample_path(triple: &LevyTriple, grid: &SamplingGrid, seed: u64) -> Result<IncrementPath> {
    Ok(PathSampler::new(triple, SimulationOptions::default())?.sample(grid, seed, 0))
}

pub fn resample_gaussian(
    path: &IncrementPath,
    triple: &LevyTriple,
    grid: &SamplingGrid,
    gauss_seed: u64,
) -> Result<IncrementPath> {
    path.resample_gaussian(triple, grid, gauss_seed)
}
