//! `curvlab`: certified curvature bounds from the command line.
//!
//! Exit codes: 0 success, 1 input error, 2 no valid certificate, 3 a
//! numerical check contradicts the certified bound.

mod args;
mod commands;
mod render;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use args::{Cli, Command, Common, Format};
use commands::Outcome;

fn emit(common: &Common, text: &str) -> anyhow::Result<()> {
    match &common.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let (common, text, outcome) = match &cli.command {
        Command::Validate(c) => {
            let (v, o) = commands::validate(c)?;
            let text = match c.format.unwrap_or(Format::Table) {
                Format::Json => render::json(&v),
                Format::Csv => render::validate_csv(&v),
                Format::Table => render::validate_table(&v),
            };
            (c, text, o)
        }
        Command::Bound(a) => {
            let (b, o) = commands::bound(a)?;
            let text = match a.common.format.unwrap_or(Format::Table) {
                Format::Json => render::json(&b),
                Format::Csv => render::bound_csv(&b),
                Format::Table => render::bound_table(&b),
            };
            (&a.common, text, o)
        }
        Command::Scan(a) => {
            let (rows, o) = commands::scan(a)?;
            let text = match a.common.format.unwrap_or(Format::Csv) {
                Format::Json => render::json(&rows),
                Format::Csv => render::scan_csv(&rows),
                Format::Table => render::scan_table(&rows),
            };
            (&a.common, text, o)
        }
        Command::Verify(a) => {
            let (v, o) = commands::verify_cmd(a)?;
            if let Some(path) = &a.report {
                fs::write(path, render::json(&v))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let text = match a.bound.common.format.unwrap_or(Format::Json) {
                Format::Json => render::json(&v),
                Format::Csv => render::verify_csv(&v),
                Format::Table => render::verify_table(&v),
            };
            (&a.bound.common, text, o)
        }
        Command::Spectrum(c) => {
            let (sp, o) = commands::spectrum_cmd(c)?;
            let text = match c.format.unwrap_or(Format::Table) {
                Format::Json => render::json(&sp),
                Format::Csv => render::spectrum_csv(&sp),
                Format::Table => render::spectrum_table(&sp),
            };
            (c, text, o)
        }
    };
    emit(common, &text)?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
