//! Front end of the `hyperlap` binary: configuration, sweeps and reports.

// negated comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod report;

use std::io::Write;

use commands::{Outcomes, RunError};
use config::{parse_config, OutputFormat, ParseOutcome};
use hyperlap::Error;

/// Environment variable holding the worker count of the sweep pool.
pub const THREADS_VAR: &str = "HYPERLAP_THREADS";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Errors caused by parameters rather than by the computation itself.
fn is_input_error(e: &RunError) -> bool {
    match e {
        RunError::Usage(_) => true,
        RunError::Compute(e) => matches!(e, Error::Domain(_) | Error::InvalidK { .. } | Error::Parse(_)),
    }
}

fn thread_count() -> Result<usize, String> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("{THREADS_VAR} must be a nonnegative integer, got `{v}`")),
    }
}

/// Run the command line `args` (`args[0]` is the program name), writing the
/// report to `--out` or `stdout` and diagnostics to `stderr`. Returns the
/// exit status.
pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cfg = match parse_config(args) {
        Ok(cfg) => cfg,
        Err(ParseOutcome::Clap(e)) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
        Err(ParseOutcome::Usage(e)) => {
            let _ = writeln!(stderr, "usage error: {e}");
            return EXIT_USAGE;
        }
    };
    let threads = match thread_count() {
        Ok(n) => n,
        Err(msg) => {
            let _ = writeln!(stderr, "usage error: {msg}");
            return EXIT_USAGE;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "cannot start worker pool: {e}");
            return EXIT_FAIL;
        }
    };
    let outcome = pool.install(|| commands::execute(&cfg));
    let text = match cfg.output {
        OutputFormat::Csv => outcome.report.to_csv(),
        OutputFormat::Json => outcome.report.to_json(),
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| format!("cannot write report: {e}")),
    };
    if let Err(msg) = written {
        let _ = writeln!(stderr, "{msg}");
        return EXIT_FAIL;
    }
    for (row, name) in outcome.report.failures() {
        let _ = writeln!(stderr, "invariant failed: row {row}: {name}");
    }
    if let Some(e) = &outcome.error {
        let _ = writeln!(stderr, "{e}");
    }
    exit_status(&outcome)
}

/// 2 for parameter errors, 1 for computation errors or any failed flag,
/// 0 otherwise.
pub fn exit_status(outcome: &Outcomes) -> i32 {
    match &outcome.error {
        Some(e) if is_input_error(e) => EXIT_USAGE,
        Some(_) => EXIT_FAIL,
        None if outcome.report.failures().is_empty() => EXIT_PASS,
        None => EXIT_FAIL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use report::{Outcome, Report, Row};

    fn outcome(flag: Outcome, error: Option<RunError>) -> Outcomes {
        Outcomes {
            report: Report {
                subcommand: "iso",
                metadata: Vec::new(),
                rows: vec![Row::new().float("h", 1.0).flag("iso", flag)],
            },
            error,
        }
    }

    #[test]
    fn status_follows_flags_and_errors() {
        assert_eq!(exit_status(&outcome(Outcome::Pass, None)), EXIT_PASS);
        assert_eq!(exit_status(&outcome(Outcome::NotApplicable, None)), EXIT_PASS);
        assert_eq!(exit_status(&outcome(Outcome::Fail, None)), EXIT_FAIL);
        let compute = RunError::Compute(Error::NonConvergence("grid".into()));
        assert_eq!(exit_status(&outcome(Outcome::Pass, Some(compute))), EXIT_FAIL);
        let domain = RunError::Compute(Error::Domain("λ".into()));
        assert_eq!(exit_status(&outcome(Outcome::Pass, Some(domain))), EXIT_USAGE);
        let usage = RunError::Usage(config::UsageError("m".into()));
        assert_eq!(exit_status(&outcome(Outcome::Fail, Some(usage))), EXIT_USAGE);
    }
}
