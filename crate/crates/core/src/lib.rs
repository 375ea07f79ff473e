//! Lévy process simulation, realized power variations and a regime oracle
//! for their laws of large numbers and central limit theorems.
//!
//! The crate is organised bottom-up:
//!
//! * [`levy_model`] holds the characteristic triple and everything that can
//!   be computed from it analytically (index set, genuine drift, `F(f)`).
//! * [`test_functions`] is the library of functions `f` together with the
//!   class metadata the oracle needs.
//! * [`path_simulator`] draws increment paths with an explicit component
//!   decomposition and jump ledger.
//! * [`variation_stats`] turns a path into `V^n(f)`, `V'^n(f)` and friends.
//! * [`regime_oracle`] predicts which limit theorem applies and what the
//!   limit is.
//! * [`mc_harness`] confronts the two by Monte Carlo.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod error;
pub mod levy_model;
pub mod mc_harness;
pub mod numerics;
pub mod path_simulator;
pub mod regime_oracle;
pub mod rng;
pub mod test_functions;
pub mod variation_stats;

pub use error::{Error, Result};
pub use levy_model::{JumpLaw, JumpMeasure, LevyTriple};
pub use path_simulator::{HorizonMode, IncrementPath, SamplingGrid};
pub use regime_oracle::{RegimeVerdict, Theorem};
pub use test_functions::{FunctionForm, TestFunction};
pub use variation_stats::{SeriesKind, VariationSeries};

