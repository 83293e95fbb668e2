//! Where a command writes, checked before any work is done.

use std::fs::OpenOptions;
use std::path::{Path, PathBuf};

use crate::config::Outputs;
use crate::failure::{Failure, Outcome, EXIT_UNWRITABLE};

#[derive(Clone, Debug)]
pub struct Targets {
    pub report: PathBuf,
    pub csv: PathBuf,
}

impl Targets {
    /// `--out DIR` gives `DIR/<command>.json` and `DIR/<command>.csv`;
    /// otherwise configured paths (relative to the config file) are used,
    /// falling back to the working directory.
    pub fn resolve(command: &str, out: Option<&Path>, configured: &Outputs, base: &Path) -> Self {
        let default_report = PathBuf::from(format!("{command}.json"));
        let default_csv = PathBuf::from(format!("{command}.csv"));
        match out {
            Some(dir) => Targets { report: dir.join(default_report), csv: dir.join(default_csv) },
            None => {
                let rel = |p: &Option<PathBuf>, d: PathBuf| match p {
                    Some(p) if p.is_relative() => base.join(p),
                    Some(p) => p.clone(),
                    None => d,
                };
                Targets { report: rel(&configured.report, default_report), csv: rel(&configured.csv, default_csv) }
            }
        }
    }

    /// Creates parent directories and opens both files for writing.
    pub fn check_writable(&self) -> Outcome<()> {
        for p in [&self.report, &self.csv] {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| unwritable(dir, e))?;
            }
            OpenOptions::new().create(true).append(true).open(p).map_err(|e| unwritable(p, e))?;
        }
        Ok(())
    }

    pub fn write_report<T: serde::Serialize>(&self, value: &T) -> Outcome<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Failure::new(EXIT_UNWRITABLE, format!("cannot serialize the report: {e}")))?;
        text.push('\n');
        write(&self.report, &text)
    }

    pub fn write_csv(&self, text: &str) -> Outcome<()> {
        write(&self.csv, text)
    }
}

fn unwritable(p: &Path, e: std::io::Error) -> Failure {
    Failure::new(EXIT_UNWRITABLE, format!("cannot write {}: {e}", p.display()))
}

fn write(p: &Path, text: &str) -> Outcome<()> {
    std::fs::write(p, text).map_err(|e| unwritable(p, e))
}
