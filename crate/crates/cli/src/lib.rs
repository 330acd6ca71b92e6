//! CLI front end: sweep configuration, CSV/JSON emission, and row-level
//! invariant checks for the rate, GDoF, bound, and simulation commands.

pub mod commands;
pub mod spec;

pub use commands::{run, CliError, RunReport};
pub use spec::{ChannelSource, Mode, RawSpec, SpecError, SweepSpec};
