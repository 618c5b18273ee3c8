//! Library surface of the command-line front end, so integration suites can
//! drive the same pipeline the binary runs.

pub mod cache;
pub mod config;
pub mod pipeline;
pub mod report;
pub mod svg;

pub use config::{RunConfig, SolverChoice};
pub use pipeline::{verify, write_outputs};
pub use report::Report;
