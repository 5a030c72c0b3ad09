//! Command-line runner for the `cvclone` experiments.
//!
//! Exit codes: 0 on success, 2 when a physics check fails, 64 for usage
//! errors (bad flags, out-of-domain parameters), 1 for I/O failures.

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Runtime(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

impl From<cvclone_core::Error> for CliError {
    fn from(e: cvclone_core::Error) -> Self {
        match e {
            cvclone_core::Error::Io(msg) => CliError::Runtime(msg),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run(argv: Vec<OsString>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let argv = match config::merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(rendered.as_bytes()) } else { stdout.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Clone(a) => commands::clone::run(a),
        Command::Qkd(a) => commands::qkd::run(a),
        Command::Oracle(a) => commands::oracle::run(a),
        Command::Verify(a) => commands::verify::run(a),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = output::emit(&outcome, cli.format, cli.out.as_deref(), stdout) {
        let _ = writeln!(stderr, "error: {e}");
        return e.exit_code();
    }
    if outcome.passed {
        EXIT_OK
    } else {
        let _ = writeln!(stderr, "physics check failed");
        EXIT_CHECK_FAILED
    }
}
