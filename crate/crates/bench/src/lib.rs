//! Benchmark harness for the GRP Euler solvers: problem registry, exact
//! references and error norms, single runs, sweeps, CSV and gnuplot output.

pub mod config;
pub mod error;
pub mod output;
pub mod problem;
pub mod reference;
pub mod run;
pub mod sweep;

pub use config::{parse_config, Config};
pub use error::BenchError;
pub use problem::{InitialData, ProblemSpec, SimpleWave};
pub use reference::{exact_reference, l1_error, linf_error, ErrorNorms};
pub use run::{run, Overrides, RunResult};
pub use sweep::{sweep, SweepReport};
