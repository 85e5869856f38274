//! Files, threads and experiments around `dihs-core`.
//!
//! - [`dmx`]: the `DMX1` binary matrix format.
//! - [`meta`]: `key=value` metadata files.
//! - [`config`]: config files merged into command-line flags.
//! - [`trace_csv`]: iteration-trace and aggregate CSV output.
//! - [`store`]: directory layouts written by `generate` and `simulate`.
//! - [`parallel`]: a scoped-thread [`dihs_core::exec::Executor`] and a monotonic clock.
//! - [`harness`]: experiment presets, `N` sweeps and sketch diagnostics.

pub mod config;
pub mod dmx;
mod error;
pub mod harness;
pub mod meta;
pub mod parallel;
pub mod store;
pub mod trace_csv;

pub use error::{Error, Result};
