//! Command-line harness for the `liouville-defects` library: one run mode
//! per config file, or the whole verification suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod modes;
pub mod report;
pub mod suite;

pub use config::{ConfigError, Mode, Resolved, RunConfig};
pub use report::{Check, Report, Series};

use std::time::Instant;

/// Runs one resolved configuration. The report carries wall-clock timing
/// only when `include_timing` is set, so reports are reproducible.
pub fn execute(config: &Resolved) -> (Report, Option<Series>) {
    let start = Instant::now();
    let out = modes::run_mode(config);
    let mut report = Report::new(config.clone(), out.checks, out.error);
    if config.include_timing {
        report.timing = Some(report::Timing {
            elapsed_seconds: start.elapsed().as_secs_f64(),
        });
    }
    (report, out.series)
}
