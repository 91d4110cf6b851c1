//! Argument resolution: command line, then `UULAB_*` variables, then the
//! key=value config file, then built-in defaults.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches};

use crate::args::Cli;
use crate::error::CliError;

#[derive(Debug)]
pub enum ParseFailure {
    Clap(clap::Error),
    Config(CliError),
}

impl From<clap::Error> for ParseFailure {
    fn from(e: clap::Error) -> Self {
        ParseFailure::Clap(e)
    }
}

/// Resolved arguments plus the effective value of every parameter, keyed by flag name.
pub struct Resolved {
    pub cli: Cli,
    pub params: BTreeMap<String, String>,
}

/// Parses a config file: `key = value` per line, `#` starts a comment.
/// Underscores in keys are accepted in place of dashes.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::invalid(format!("config line {}: expected key=value", n + 1)))?;
        let key = k.trim().to_ascii_lowercase().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::invalid(format!("config line {}: empty key", n + 1)));
        }
        if out.iter().any(|(existing, _)| *existing == key) {
            return Err(CliError::invalid(format!("config line {}: duplicate key {key}", n + 1)));
        }
        out.push((key, v.trim().to_owned()));
    }
    Ok(out)
}

fn defaulted(m: &ArgMatches, id: &str) -> bool {
    matches!(m.value_source(id), None | Some(ValueSource::DefaultValue))
}

pub fn resolve(argv: Vec<OsString>) -> Result<Resolved, ParseFailure> {
    let cmd = Cli::command();
    let first = cmd.clone().try_get_matches_from(&argv)?;
    let matches = match first.get_one::<std::path::PathBuf>("config") {
        None => first,
        Some(path) => {
            let entries = read_config(path).map_err(ParseFailure::Config)?;
            let (sub_name, sub_m) = first.subcommand().expect("subcommand is required");
            let sub_cmd = cmd.find_subcommand(sub_name).expect("parsed subcommand exists");
            let mut extended = argv.clone();
            for (key, value) in entries {
                let arg = sub_cmd
                    .get_arguments()
                    .chain(cmd.get_arguments())
                    .find(|a| a.get_long() == Some(key.as_str()) && a.get_id() != "config")
                    .ok_or_else(|| {
                        ParseFailure::Config(CliError::invalid(format!("unknown config key {key:?} for {sub_name}")))
                    })?;
                if !defaulted(sub_m, arg.get_id().as_str()) {
                    continue;
                }
                if arg.get_action().takes_values() {
                    extended.push(format!("--{key}={value}").into());
                } else {
                    let on: bool = value.parse().map_err(|_| {
                        ParseFailure::Config(CliError::invalid(format!("config key {key}: expected true or false")))
                    })?;
                    if on {
                        extended.push(format!("--{key}").into());
                    }
                }
            }
            cmd.clone().try_get_matches_from(&extended)?
        }
    };
    let params = collect_params(&cmd, &matches);
    let cli = Cli::from_arg_matches(&matches)?;
    Ok(Resolved { cli, params })
}

fn collect_params(cmd: &clap::Command, m: &ArgMatches) -> BTreeMap<String, String> {
    let mut params = BTreeMap::new();
    let mut record = |args: &mut dyn Iterator<Item = &clap::Arg>, m: &ArgMatches| {
        for a in args {
            let Some(long) = a.get_long() else { continue };
            if matches!(long, "help" | "version") {
                continue;
            }
            if let Ok(Some(raw)) = m.try_get_raw(a.get_id().as_str()) {
                let joined: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
                params.insert(long.to_owned(), joined.join(","));
            }
        }
    };
    if let Some((name, sub_m)) = m.subcommand() {
        let sub = cmd.find_subcommand(name).expect("parsed subcommand exists");
        record(&mut sub.get_arguments(), sub_m);
    }
    record(&mut cmd.get_arguments(), m);
    params
}
