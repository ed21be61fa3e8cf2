use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

/// Failure of a subcommand, carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad input, an invalid map, or a check that came out false. Exit 1.
    Invalid { kind: &'static str, detail: String },
    /// Budget or sample size exhausted before a decision. Exit 2.
    Inconclusive { detail: String },
}

impl CliError {
    pub fn invalid(kind: &'static str, detail: impl fmt::Display) -> Self {
        CliError::Invalid {
            kind,
            detail: detail.to_string(),
        }
    }

    pub fn inconclusive(detail: impl fmt::Display) -> Self {
        CliError::Inconclusive {
            detail: detail.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid { .. } => 1,
            CliError::Inconclusive { .. } => 2,
        }
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            detail: &'a str,
        }
        let (error, detail) = match self {
            CliError::Invalid { kind, detail } => (*kind, detail.as_str()),
            CliError::Inconclusive { detail } => ("inconclusive", detail.as_str()),
        };
        serde_json::to_string(&Line { error, detail }).expect("strings serialize")
    }
}

impl From<ietpc::IetError> for CliError {
    fn from(e: ietpc::IetError) -> Self {
        CliError::invalid("iet", e)
    }
}

impl From<ietpc::PcError> for CliError {
    fn from(e: ietpc::PcError) -> Self {
        use ietpc::PcError;
        match e {
            PcError::InsufficientVisits(_) | PcError::DenominatorBlowup { .. } => CliError::inconclusive(e),
            PcError::PeriodicOrbit { .. } => CliError::invalid("periodic_orbit", e),
            e => CliError::invalid("pc", e),
        }
    }
}

impl From<ietpc::ConstructError> for CliError {
    fn from(e: ietpc::ConstructError) -> Self {
        CliError::invalid("construct", e)
    }
}

impl From<ietpc::WordError> for CliError {
    fn from(e: ietpc::WordError) -> Self {
        CliError::invalid("words", e)
    }
}

impl From<ietpc::NumericError> for CliError {
    fn from(e: ietpc::NumericError) -> Self {
        CliError::invalid("number", e)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

/// Writes to `path` through a temporary file in the same directory, or to
/// stdout when no path is given.
pub fn emit(path: Option<&Path>, force: bool, text: &str) -> Result<(), CliError> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::invalid("io", e))
        }
        Some(path) => write_atomic(path, force, text),
    }
}

pub fn write_atomic(path: &Path, force: bool, text: &str) -> Result<(), CliError> {
    if path.as_os_str().is_empty() {
        return Err(CliError::invalid("argument", "empty output path"));
    }
    if path.exists() && !force {
        return Err(CliError::invalid(
            "io",
            format!("{} exists; pass --force to overwrite", path.display()),
        ));
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| CliError::invalid("io", format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
