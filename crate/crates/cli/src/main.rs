//! `mfig`: curvature bounds, transport distances, geodesics and functional
//! inequality checks on finite graphs.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use serde_json::Value;

use commands::{exit_code, Failure};
use config::{usage, Command, Common, RunConfig, UsageError};

#[derive(Debug, Parser)]
#[command(name = "mfig", version, about = "Mean-field information curvature on graphs")]
struct Cli {
    #[command(flatten)]
    common: Common,
    /// JSON run configuration, as echoed under `config` in a report. Replaces
    /// the problem flags; `--out` and `--csv` still apply.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'static str,
    config: &'a RunConfig,
    pass: bool,
    result: Value,
}

fn load_config(path: &Path) -> Result<RunConfig, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage("config", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage("config", format!("{}: {e}", path.display())))
}

fn resolve(cli: Cli) -> Result<RunConfig, UsageError> {
    match (cli.config, cli.command) {
        (Some(path), None) => {
            let mut cfg = load_config(&path)?;
            cfg.common.out = cli.common.out;
            cfg.common.csv = cli.common.csv;
            Ok(cfg)
        }
        (Some(_), Some(_)) => Err(usage("config", "give either a subcommand or a config file, not both")),
        (None, Some(command)) => Ok(RunConfig { common: cli.common, command }),
        (None, None) => Err(usage("config", "no subcommand given")),
    }
}

fn write(path: &Path, text: &str) -> Result<(), UsageError> {
    std::fs::write(path, text).map_err(|e| usage("out", format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cfg = match resolve(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match commands::run(&cfg.common, &cfg.command) {
        Ok(o) => o,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let report = Report { command: cfg.command.name(), config: &cfg, pass: outcome.pass, result: outcome.result };
    let mut json = serde_json::to_string_pretty(&report).expect("reports serialize");
    json.push('\n');
    let written = match &cfg.common.out {
        Some(path) => write(path, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    };
    let written = written.and_then(|()| match (&cfg.common.csv, &outcome.csv) {
        (Some(path), Some(csv)) => write(path, csv).map_err(|e| usage("csv", e.msg)),
        _ => Ok(()),
    });
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(if outcome.pass { 0 } else { 1 })
}
