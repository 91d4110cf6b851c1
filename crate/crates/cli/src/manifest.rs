//! Plain-text run manifest written next to every set of CSV outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use crate::commands::Outcome;
use crate::error::{CliError, Context};

pub struct Run<'a> {
    pub subcommand: &'static str,
    pub params: &'a BTreeMap<String, String>,
    pub outcome: &'a Outcome,
    pub started: SystemTime,
    pub wall_time: Duration,
}

pub fn file_name(subcommand: &str) -> String {
    format!("manifest_{subcommand}.txt")
}

/// Parameters, results and outputs come first in a fixed order; timing lines come last.
pub fn render(run: &Run) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "tool=uulab {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "subcommand={}", run.subcommand);
    for (k, v) in run.params {
        let _ = writeln!(s, "param.{k}={v}");
    }
    for (k, v) in &run.outcome.results {
        let _ = writeln!(s, "result.{k}={v}");
    }
    for o in &run.outcome.outputs {
        let _ = writeln!(s, "output={o}");
    }
    let started = run.started.duration_since(UNIX_EPOCH).unwrap_or_default();
    let _ = writeln!(s, "started_unix={}", started.as_secs());
    let _ = writeln!(s, "wall_time_s={:.3}", run.wall_time.as_secs_f64());
    s
}

pub fn write(dir: &Path, run: &Run) -> Result<(), CliError> {
    let path = dir.join(file_name(run.subcommand));
    std::fs::write(&path, render(run)).context(format!("cannot write {}", path.display()))
}
