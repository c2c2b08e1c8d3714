use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::CliError;
use crate::eval::{run_source, Options};
use crate::report::Report;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Text => "txt",
            Format::Json => "json",
        }
    }

    pub fn render(self, r: &Report) -> String {
        match self {
            Format::Text => r.to_text(),
            Format::Json => r.to_json(),
        }
    }
}

/// Golden-file handling for one run.
#[derive(Clone, Debug)]
pub struct Golden {
    pub dir: PathBuf,
    /// Write reports instead of comparing them.
    pub bless: bool,
}

pub fn run_file(path: &Path, opts: &Options) -> Result<Report, CliError> {
    let src = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    run_source(&src, opts).map_err(|source| CliError::Script {
        path: path.to_path_buf(),
        source,
    })
}

/// Compares `rendered` with `<dir>/<script stem>.<ext>`, or writes it when blessing.
pub fn check_golden(
    script: &Path,
    rendered: &str,
    format: Format,
    golden: &Golden,
) -> Result<(), CliError> {
    let stem = script.file_stem().unwrap_or_default();
    let file = golden.dir.join(stem).with_extension(format.extension());
    let io = |source| CliError::Io {
        path: file.clone(),
        source,
    };
    if golden.bless {
        fs::create_dir_all(&golden.dir).map_err(io)?;
        return fs::write(&file, rendered).map_err(io);
    }
    if !file.exists() {
        return Err(CliError::MissingGolden {
            path: script.to_path_buf(),
            golden: file,
        });
    }
    let stored = fs::read_to_string(&file).map_err(io)?;
    if stored == rendered {
        return Ok(());
    }
    let line = stored
        .lines()
        .zip(rendered.lines())
        .position(|(a, b)| a != b)
        .unwrap_or_else(|| stored.lines().count().min(rendered.lines().count()))
        + 1;
    Err(CliError::Golden {
        path: script.to_path_buf(),
        golden: file,
        line,
    })
}

/// One script's outcome inside a suite.
#[derive(Debug)]
pub struct SuiteEntry {
    pub script: PathBuf,
    pub outcome: Result<Report, CliError>,
    /// Golden comparison result, when a golden directory was given.
    pub golden: Option<Result<(), CliError>>,
}

impl SuiteEntry {
    pub fn passed(&self) -> bool {
        matches!(&self.outcome, Ok(r) if r.passed()) && !matches!(self.golden, Some(Err(_)))
    }
}

/// The `.sl` scripts of `dir`, sorted by name.
pub fn scripts_in(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut out: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "sl"))
        .collect();
    out.sort();
    Ok(out)
}

/// Runs every script of `dir` concurrently; results come back in name order.
pub fn run_suite(
    dir: &Path,
    opts: &Options,
    format: Format,
    golden: Option<&Golden>,
) -> Result<Vec<SuiteEntry>, CliError> {
    let scripts = scripts_in(dir)?;
    Ok(scripts
        .par_iter()
        .map(|script| {
            let outcome = run_file(script, opts);
            let golden = match (&outcome, golden) {
                (Ok(r), Some(g)) => Some(check_golden(script, &format.render(r), format, g)),
                _ => None,
            };
            SuiteEntry {
                script: script.clone(),
                outcome,
                golden,
            }
        })
        .collect())
}
