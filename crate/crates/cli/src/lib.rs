//! Config files, suite runs and report files for `levyvar`.

pub mod config;
pub mod inspect;
pub mod render;
pub mod suite;

pub use config::{parse_config, ConfigError, Formats, SuiteConfig};
pub use suite::{run_suite, Outcome, RunOptions, SuiteError, SuiteSummary};
