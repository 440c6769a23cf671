//! `fuzzstat`: species-discovery statistics for fuzzing campaigns.
//!
//! Exit status: 0 on success, 1 for usage errors, 2 for unreadable or
//! inconsistent input data, 3 when the data do not support the requested
//! estimate. With `--format json-lines`, errors are also written to stderr
//! as a JSON object `{"error": <code>, "message": <text>, "exit_code": <n>}`.

mod args;
mod commands;
mod input;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use fuzzstat_core::{Error, ErrorKind};

use crate::args::{Cli, Format};

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Undefined => 3,
    }
}

fn report(err: &Error, format: Format) -> u8 {
    let code = exit_code(err.kind());
    let mut stderr = std::io::stderr().lock();
    if format == Format::JsonLines {
        let json = serde_json::json!({
            "error": err.code(),
            "message": err.to_string(),
            "exit_code": code,
        });
        let _ = writeln!(stderr, "{json}");
    } else {
        let _ = writeln!(stderr, "fuzzstat: {err}");
    }
    code
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.exit_code() == 0 { 0 } else { 1 });
        }
    };
    let format = cli.format;
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let result = commands::run(cli, &mut out).and_then(|()| out.flush().map_err(Error::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            ExitCode::from(report(&e, format))
        }
    }
}
