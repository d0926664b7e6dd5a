//! Command-line harness around `csl-core`: reproducible trajectory,
//! ensemble, ruin-game, bound-table, collapse-time and heating runs with
//! machine-readable CSV/JSON output.
//!
//! Every output embeds the resolved configuration and seed; reruns with
//! the same configuration are byte-identical regardless of `--threads`.

use std::ffi::OsString;

use clap::Parser;

pub mod cli;
pub mod output;
pub mod run;

/// Exit code 0 on success, 1 on a runtime error, 2 on a usage error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match cli::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // clap prints help/version to stdout (exit 0) and usage
            // errors to stderr (exit 2).
            let _ = err.print();
            return err.exit_code();
        }
    };
    if let Err(message) = run::usage_check(&cli) {
        eprintln!("error: {message}");
        return 2;
    }
    match run::execute(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("csl: {err:#}");
            1
        }
    }
}
