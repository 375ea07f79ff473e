//! Numerical building blocks shared by the model, the oracle and the
//! harness: compensated summation, adaptive quadrature and the sample
//! statistics used to judge Monte Carlo output.

pub mod kahan;
pub mod quadrature;
pub mod stats;

pub use kahan::NeumaierSum;
pub use quadrature::{integrate, integrate_with_breaks, normal_expectation, QuadratureOptions};
