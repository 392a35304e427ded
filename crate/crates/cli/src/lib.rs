//! The `evcop` command-line tool.
//!
//! Every run produces a single result document. In JSON form it is
//!
//! ```text
//! { "tool": "evcop", "version": ..., "command": ..., "config": {...},
//!   "result": {...}, "timing": {"seconds": ...} }
//! ```
//!
//! where `timing` appears only with `--timing`, floats carry 17
//! significant digits and non-finite values are `null` (infinite
//! parameters are the string `"inf"`). With `--format csv` the document is
//! reduced to the command's table.

pub mod args;
pub mod commands;
pub mod data;
pub mod error;
pub mod output;
pub mod plot;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use evcop_core::{RngSeed, DEFAULT_SEED};
use serde_json::json;

use args::{Cli, Command, Format, ParseFailure};
use commands::Report;
use error::{io, usage, CliError, CliResult};

fn dispatch(cli: &Cli, seed: RngSeed) -> CliResult<Report> {
    match &cli.command {
        Command::Eval(a) => commands::eval(a),
        Command::Sample(a) => commands::sample(a, seed),
        Command::Estimate(a) => commands::estimate_cmd(a),
        Command::Fit(a) => commands::fit(a),
        Command::Coeffs(a) => commands::coeffs(a),
        Command::Evtest(a) => commands::evtest(a, seed),
        Command::Doa(a) => commands::doa(a),
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| io(format!("cannot write {}: {e}", path.display())))
}

/// Runs one command and renders its output.
pub fn execute(cli: &Cli) -> CliResult<String> {
    let name = cli.command.name();
    if cli.global.plot.is_some() && !matches!(cli.command, Command::Eval(_) | Command::Estimate(_)) {
        return Err(usage(format!("--plot is not available for {name}")));
    }
    let seed = RngSeed::new(cli.global.seed.unwrap_or(DEFAULT_SEED));
    let started = Instant::now();
    let report = dispatch(cli, seed)?;
    let seconds = started.elapsed().as_secs_f64();
    let format = cli.global.format.unwrap_or(match cli.command {
        Command::Sample(_) => Format::Csv,
        _ => Format::Json,
    });
    let text = match format {
        Format::Csv => report.table.to_csv(),
        Format::Json => {
            let mut doc = json!({
                "tool": "evcop",
                "version": env!("CARGO_PKG_VERSION"),
                "command": name,
                "config": report.config,
                "result": report.result,
            });
            if cli.global.timing {
                doc["timing"] = json!({ "seconds": seconds });
            }
            output::to_json(&doc)?
        }
    };
    if let (Some(path), Some(svg)) = (&cli.global.plot, &report.svg) {
        write_file(path, svg)?;
    }
    Ok(text)
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match args::parse(argv) {
        Ok(cli) => cli,
        Err(ParseFailure::Clap(e)) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(rendered.as_bytes());
                return 0;
            }
            let _ = stderr.write_all(rendered.as_bytes());
            return 2;
        }
        Err(ParseFailure::Usage(m)) => return fail(stderr, &CliError::Usage(m)),
        Err(ParseFailure::Io(m)) => return fail(stderr, &CliError::Io(m)),
    };
    let result = execute(&cli).and_then(|text| match &cli.global.output {
        Some(path) => write_file(path, &text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| io(format!("cannot write output: {e}"))),
    });
    match result {
        Ok(()) => 0,
        Err(e) => fail(stderr, &e),
    }
}

fn fail(stderr: &mut dyn Write, e: &CliError) -> i32 {
    let _ = writeln!(stderr, "evcop: error: {e}");
    e.exit_code()
}
