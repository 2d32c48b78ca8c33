use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use liouville_harness::suite::{run_suite, SuiteOptions};
use liouville_harness::{execute, RunConfig};

#[derive(Parser)]
#[command(version, about = "Lattice and Liouville integrable-defect verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tolerance_scale: Option<f64>,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV path for the series, if the mode produces one.
        #[arg(long)]
        series: Option<PathBuf>,
        /// Include wall-clock timing in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Run every mode at its defaults.
    Suite {
        #[arg(long, default_value = "suite-out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tolerance_scale: Option<f64>,
        #[arg(long)]
        timing: bool,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            seed,
            tolerance_scale,
            out,
            series,
            timing,
        } => {
            let resolved = RunConfig::from_path(&config).and_then(|mut c| {
                c.seed = seed.or(c.seed);
                c.tolerance_scale = tolerance_scale.or(c.tolerance_scale);
                c.include_timing = Some(timing || c.include_timing.unwrap_or(false));
                c.report_out = out.or(c.report_out);
                c.series_out = series.or(c.series_out);
                c.resolve()
            });
            let resolved = match resolved {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let (report, table) = execute(&resolved);
            if let (Some(path), Some(table)) = (&resolved.series_out, &table) {
                if let Err(e) = std::fs::write(path, table.to_csv()) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_FAIL);
                }
            }
            match &resolved.report_out {
                Some(path) => {
                    if let Err(e) = report.write_json(path) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(EXIT_FAIL);
                    }
                }
                None => print!("{}", report.to_json()),
            }
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {} [{}]: measured {:e}", c.name, c.anchor, c.measured);
            }
            if let Some(e) = &report.error {
                eprintln!("aborted: {e}");
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            }
        }
        Command::Suite {
            out,
            seed,
            tolerance_scale,
            timing,
        } => {
            let opts = SuiteOptions {
                seed,
                tolerance_scale,
                include_timing: timing,
            };
            match run_suite(&out, &opts) {
                Ok(summary) => {
                    for m in &summary.modes {
                        println!(
                            "{:<22} {:?} {}/{}",
                            m.mode.name(),
                            m.status,
                            m.checks_passed,
                            m.checks_total
                        );
                    }
                    if summary.status == liouville_harness::report::Status::Pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_FAIL)
                    }
                }
                Err(liouville_harness::suite::SuiteError::Config(e)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_CONFIG)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_FAIL)
                }
            }
        }
    }
}
