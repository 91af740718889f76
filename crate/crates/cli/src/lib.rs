//! Command-line front end for `cw11-core`.
//!
//! Every command prints a [`RunReport`] as canonical JSON on stdout: the
//! arguments, SHA-256 digests of the input files, the command's results, the
//! tolerances in effect and the exit status. `--out FILE` writes the data
//! product (augmented jet, CSV rows, or a copy of the report).
//!
//! Exit statuses: 0 success, 1 infeasible data, 2 malformed input,
//! 3 failed numerical certificate.

pub mod args;
pub mod commands;
pub mod report;

use std::ffi::OsString;

use clap::Parser;

pub use args::Cli;
pub use commands::{execute, Outcome, EXIT_CERTIFICATE, EXIT_INFEASIBLE, EXIT_MALFORMED, EXIT_OK};
pub use report::RunReport;

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<Outcome, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&args)?;
    let argv = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    Ok(execute(cli, argv))
}
