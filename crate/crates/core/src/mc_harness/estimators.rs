//! Monte Carlo estimates of `H_t(f) = E f(X_t)` and `Γ_t(f) = Var f(X_t)`.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::levy_model::LevyTriple;
use crate::numerics::stats::{Estimate, Moments};
use crate::path_simulator::{PathSampler, SimulationOptions};
use crate::regime_oracle::CenterFunction;
use crate::rng::{stream, StreamTag};
use crate::test_functions::TestFunction;

/// Draws per chunk; fixed so results do not depend on the thread count.
const CHUNK: u64 = 1 << 15;

fn moments<G: Fn(f64) -> f64 + Sync>(sampler: &PathSampler, g: G, t: f64, m: u64, seed: u64) -> Moments {
    let chunks = m.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c, StreamTag::SingleIncrement);
            let mut acc = Moments::default();
            let len = CHUNK.min(m - c * CHUNK);
            for _ in 0..len {
                acc.push(g(sampler.sample_single(t, &mut rng)));
            }
            acc
        })
        .collect();
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    total
}

fn check_m(m: u64) -> Result<()> {
    if m < 2 {
        return Err(invalid("replicas", format!("need at least 2 draws, got {m}")));
    }
    Ok(())
}

/// `E g(X_t)` (or `E g(X_t/√t)` when `rescaled`) from `m` independent draws.
pub fn estimate_h_of(
    triple: &LevyTriple,
    options: SimulationOptions,
    g: &CenterFunction,
    rescaled: bool,
    t: f64,
    m: u64,
    seed: u64,
) -> Result<Estimate> {
    check_m(m)?;
    let sampler = PathSampler::new(triple, options)?;
    let s = if rescaled { t.sqrt() } else { 1.0 };
    Ok(moments(&sampler, |x| g.eval(x / s), t, m, seed).estimate())
}

/// `Var g(X_t)` with the standard error of the sample variance.
pub fn estimate_gamma_of(
    triple: &LevyTriple,
    options: SimulationOptions,
    g: &CenterFunction,
    t: f64,
    m: u64,
    seed: u64,
) -> Result<Estimate> {
    check_m(m)?;
    let sampler = PathSampler::new(triple, options)?;
    Ok(moments(&sampler, |x| g.eval(x), t, m, seed).variance_estimate())
}

pub fn estimate_h(triple: &LevyTriple, f: &TestFunction, t: f64, m: u64, seed: u64) -> Result<Estimate> {
    estimate_h_of(triple, SimulationOptions::default(), &CenterFunction::plain(*f), false, t, m, seed)
}

pub fn estimate_gamma(triple: &LevyTriple, f: &TestFunction, t: f64, m: u64, seed: u64) -> Result<Estimate> {
    estimate_gamma_of(triple, SimulationOptions::default(), &CenterFunction::plain(*f), t, m, seed)
}
