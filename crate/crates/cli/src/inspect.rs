//! `predict` and `simulate`: the oracle and the sampler on their own.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use levy_variation::mc_harness::ExperimentConfig;
use levy_variation::path_simulator::PathSampler;
use levy_variation::regime_oracle::{applicable_lln, classify_rescaled, clt_verdicts};
use levy_variation::{HorizonMode, IncrementPath, RegimeVerdict, Result, SeriesKind};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub experiment: String,
    pub function: String,
    pub rescaled: bool,
    pub lln: Vec<RegimeVerdict>,
    pub clt: Vec<RegimeVerdict>,
}

pub fn predict(exp: &ExperimentConfig) -> Result<Vec<Prediction>> {
    let mode = exp.horizon_mode();
    exp.functions
        .iter()
        .map(|spec| {
            let f = &spec.f;
            let lln = if spec.rescaled {
                vec![classify_rescaled(&exp.model, f, mode)?]
            } else {
                applicable_lln(&exp.model, f, mode)?
            };
            let kind = match (mode, spec.rescaled) {
                (HorizonMode::FixedHorizon, false) => SeriesKind::Vn,
                (HorizonMode::FixedHorizon, true) => SeriesKind::VnPrime,
                (HorizonMode::GrowingHorizon, false) => SeriesKind::VnBar,
                (HorizonMode::GrowingHorizon, true) => SeriesKind::VnBarPrime,
            };
            Ok(Prediction {
                experiment: exp.name.clone(),
                function: f.to_string(),
                rescaled: spec.rescaled,
                lln,
                clt: clt_verdicts(&exp.model, f, kind)?,
            })
        })
        .collect()
}

/// One path of the experiment's model on its finest grid, or on step
/// `delta` when given.
pub fn simulate(exp: &ExperimentConfig, delta: Option<f64>, replica: u64) -> Result<IncrementPath> {
    let grid = match delta {
        Some(d) => exp.grid(d)?,
        None => *exp.grids()?.last().expect("validated configs have a grid"),
    };
    let sampler = PathSampler::new(&exp.model, exp.simulation)?;
    Ok(sampler.sample(&grid, exp.seed, replica))
}

/// `path.dat` (time, value), `jumps.dat` (time, size) and the binary dump
/// `path.bin`.
pub fn write_path(path: &IncrementPath, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let delta = path.grid.delta;
    let files = [dir.join("path.dat"), dir.join("jumps.dat"), dir.join("path.bin")];
    let mut w = io::BufWriter::new(fs::File::create(&files[0])?);
    writeln!(w, "# time value")?;
    writeln!(w, "0 0")?;
    let mut x = 0.0;
    for (i, dx) in path.increments.iter().enumerate() {
        x += dx;
        writeln!(w, "{:e} {:e}", (i + 1) as f64 * delta, x)?;
    }
    w.flush()?;
    let mut w = io::BufWriter::new(fs::File::create(&files[1])?);
    writeln!(w, "# time size")?;
    for j in &path.big_jumps {
        writeln!(w, "{:e} {:e}", j.time, j.size)?;
    }
    w.flush()?;
    path.write_binary(io::BufWriter::new(fs::File::create(&files[2])?))?;
    Ok(files.to_vec())
}
