//! Scenarios, closed-loop simulation, output files, oracles and benchmarks.

pub mod bench;
pub mod oracle;
pub mod output;
pub mod run;
pub mod scenario;
