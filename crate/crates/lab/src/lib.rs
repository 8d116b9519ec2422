//! Command-line laboratory around `sibm-core`: configuration, experiment
//! orchestration, reports and file formats.
//!
//! Exit codes: 0 when every verdict passes (or the command only reports),
//! 1 on a failed verdict or an I/O or runtime error, 2 on a usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use anyhow::{Context, Result};
use clap::Parser;

pub mod cli;
pub mod commands;
pub mod config;
pub mod io;
pub mod report;

use config::UsageError;

/// Reads a config file: `key=value` lines, or a JSON report whose `config`
/// object is replayed.
pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError::Unreadable { path: path.display().to_string(), reason: e.to_string() })?;
    if !text.trim_start().starts_with('{') {
        return Ok(config::parse_config_text(&text)?);
    }
    let doc: report::Report = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a report", path.display()))
        .map_err(|e| UsageError::Unreadable { path: path.display().to_string(), reason: format!("{e:#}") })?;
    Ok(doc.config)
}

fn execute(cli: cli::Cli) -> Result<report::Verdict> {
    let command = cli.command.command();
    let file = match &cli.keys.config {
        Some(p) => load_config(p)?,
        None => BTreeMap::new(),
    };
    let cfg = config::resolve(command, &file, &cli.keys.flags(), |seed| eprintln!("seed not given; using {seed}"))?;
    if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build()?;
        pool.install(|| commands::run(&cfg))
    } else {
        commands::run(&cfg)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match cli::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(v) => v.exit_code(),
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("usage error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
