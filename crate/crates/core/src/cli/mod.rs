//! Configuration, batch tasks and file output for the `qcds` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{with_param, RunConfig, SweepAxis, SweepBlock, Task};
pub use run::{benchmark, exit_code, mc_check, run, sweep, BenchmarkRow, McCheckRow, SweepRow};
