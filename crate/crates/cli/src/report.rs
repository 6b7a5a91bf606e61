//! Report envelope, output formats and exit codes.

use std::fmt::Write as _;
use std::process::ExitCode;

use rigidity_core::{Error, ToleranceContext};
use serde::Serialize;
use serde_json::Value;

/// Bumped whenever a field is renamed or removed.
pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Tool {
    pub fn current() -> Self {
        Tool {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// Top-level object of every single-document report.
#[derive(Serialize)]
pub struct AnalysisReport<R: Serialize> {
    pub schema_version: &'static str,
    pub tool: Tool,
    pub command: &'static str,
    pub input: Value,
    pub seed: u64,
    pub tolerances: ToleranceContext,
    pub result: R,
}

impl<R: Serialize> AnalysisReport<R> {
    pub fn new(command: &'static str, input: Value, seed: u64, tolerances: ToleranceContext, result: R) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: Tool::current(),
            command,
            input,
            seed,
            tolerances,
            result,
        }
    }
}

/// Renders a value as pretty JSON or as `path,value` rows.
pub fn render<T: Serialize>(value: &T, format: Format) -> Result<String, CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Internal(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut out = String::from("path,value\n");
            flatten(&v, String::new(), &mut out);
            out
        }
    })
}

/// One compact JSON line.
pub fn json_line<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string(value).map_err(|e| CliError::Internal(e.to_string()))
}

fn flatten(v: &Value, path: String, out: &mut String) {
    let join = |key: &str| if path.is_empty() { key.to_string() } else { format!("{path}.{key}") };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(x, join(k), out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(x, join(&i.to_string()), out);
            }
        }
        Value::Null => {
            let _ = writeln!(out, "{},", csv_field(&path));
        }
        Value::String(s) => {
            let _ = writeln!(out, "{},{}", csv_field(&path), csv_field(s));
        }
        other => {
            let _ = writeln!(out, "{},{}", csv_field(&path), other);
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid input, bad arguments.
    Input(String),
    /// Two routes that must agree did not.
    Inconsistent(String),
    /// A property suite recorded failures.
    SuiteFailure(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::SuiteFailure(_) => 1,
            CliError::Input(_) => 2,
            CliError::Inconsistent(_) | CliError::Internal(_) => 3,
        })
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Inconsistent(m) | CliError::SuiteFailure(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Inconsistent(_) => CliError::Inconsistent(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}
