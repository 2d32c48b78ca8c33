//! Every mode at its defaults, written to one directory.

use std::path::Path;

use serde::Serialize;

use crate::config::{ConfigError, Mode, RunConfig};
use crate::report::Status;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteEntry {
    pub mode: Mode,
    pub status: Status,
    pub checks_passed: usize,
    pub checks_total: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub seed: u64,
    pub tolerance_scale: f64,
    pub modes: Vec<SuiteEntry>,
    pub status: Status,
}

#[derive(Clone, Debug, Default)]
pub struct SuiteOptions {
    pub seed: Option<u64>,
    pub tolerance_scale: Option<f64>,
    pub include_timing: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn write(path: &Path, text: &str) -> Result<(), SuiteError> {
    std::fs::write(path, text).map_err(|source| SuiteError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Runs all modes, writing `<mode>.json`, `<mode>.csv` where a series
/// exists, and `suite.json`.
pub fn run_suite(out: &Path, opts: &SuiteOptions) -> Result<SuiteSummary, SuiteError> {
    std::fs::create_dir_all(out).map_err(|source| SuiteError::Io {
        path: out.display().to_string(),
        source,
    })?;
    let mut modes = Vec::new();
    let mut seed = 0;
    let mut scale = 1.0;
    for mode in Mode::ALL {
        let mut cfg = RunConfig::for_mode(mode);
        cfg.seed = opts.seed;
        cfg.tolerance_scale = opts.tolerance_scale;
        cfg.include_timing = Some(opts.include_timing);
        let resolved = cfg.resolve()?;
        seed = resolved.seed;
        scale = resolved.tolerance_scale;
        let (report, series) = crate::execute(&resolved);
        write(&out.join(format!("{}.json", mode.name())), &report.to_json())?;
        if let Some(s) = series {
            write(&out.join(format!("{}.csv", mode.name())), &s.to_csv())?;
        }
        modes.push(SuiteEntry {
            mode,
            status: report.status,
            checks_passed: report.checks.iter().filter(|c| c.pass).count(),
            checks_total: report.checks.len(),
            error: report.error.clone(),
        });
    }
    let ok = modes.iter().all(|m| m.status == Status::Pass);
    let summary = SuiteSummary {
        seed,
        tolerance_scale: scale,
        modes,
        status: if ok { Status::Pass } else { Status::Fail },
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary is serializable");
    text.push('\n');
    write(&out.join("suite.json"), &text)?;
    Ok(summary)
}
