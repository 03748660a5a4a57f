//! Command-line front end for `ptex-core`.

pub mod args;
pub mod commands;
pub mod error;
pub mod format;
pub mod ingest;
pub mod record;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::{Output, Style};
use error::CliResult;

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 ok, 1 usage, 2 data error, 3 numerical failure.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    let style = Style { json: cli.json, digits: cli.precision as usize, color: format::color_enabled() };
    match dispatch(&cli.command, &style) {
        Ok(o) => {
            for w in &o.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            if out.write_all(o.stdout.as_bytes()).is_err() {
                return 2;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: &Command, style: &Style) -> CliResult<Output> {
    match cmd {
        Command::Fit(a) => commands::fit(a, style),
        Command::Sample(a) => commands::sample(a),
        Command::Risk(a) => commands::risk(a, style),
        Command::Regress(a) => commands::regress(a, style),
        Command::Gof(a) => commands::gof(a, style),
        Command::Moments(a) => commands::moments(a, style),
    }
}
