//! Library behind the `cfcoef` binary, so commands can be driven from tests
//! without spawning a process.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;
pub mod sweep;

use std::io::Write;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EMPTY_REGION: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

fn default_format(command: &Command) -> Format {
    match command {
        Command::Bound(b) if b.table => Format::Csv,
        _ => Format::Json,
    }
}

/// Runs one invocation. `argv[0]` is the program name.
pub fn run(argv: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let argv = match config::expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let outcome = match commands::dispatch(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let format = cli.global.format.unwrap_or_else(|| default_format(&cli.command));
    let text = match format {
        Format::Json => {
            let config = json!({
                "global": cli.global,
                "command": cli.command,
            });
            output::render_json(&config, &outcome.results, !cli.global.no_timestamp)
        }
        Format::Csv => outcome.table.render(cli.global.precision),
    };
    if let Err(e) = output::emit(&text, cli.global.output.as_deref(), stdout) {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_IO;
    }
    if let Some(msg) = &outcome.message {
        let _ = writeln!(stderr, "{msg}");
    }
    outcome.exit
}
