//! Configuration, convergence studies, benchmarks and CSV reports for the
//! delayed Markov chain approximation in `delaymca-core`.

pub mod bench;
pub mod config;
pub mod demo;
pub mod diagnostics;
pub mod error;
pub mod report;
pub mod study;

pub use bench::{run_brownian_benchmark, BenchmarkReport, WalkInstance};
pub use config::{load_config, ProblemConfig};
pub use demo::{run_pathological_demo, DemoConfig, DemoReport};
pub use diagnostics::{policy_rows, run_check, run_simulate, CheckReport, SimulateReport};
pub use error::{HarnessError, Result};
pub use report::{emit_reports, fmt_real, Reports};
pub use study::{run_study, StudyReport};
