//! Output artifacts: a computed table plus the metadata that makes the
//! run reproducible, rendered as CSV or JSON and written atomically.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// One axis of the sampling grid backing an artifact.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// A parameter echoed into the output header.
#[derive(Clone, Debug)]
pub enum ParamValue {
    Num(f64),
    Int(u64),
    Text(String),
}

impl ParamValue {
    fn render(&self) -> String {
        match self {
            ParamValue::Num(v) => format!("{v}"),
            ParamValue::Int(v) => format!("{v}"),
            ParamValue::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            ParamValue::Num(v) => serde_json::json!(v),
            ParamValue::Int(v) => serde_json::json!(v),
            ParamValue::Text(s) => serde_json::json!(s),
        }
    }
}

/// One CSV cell; indices print as integers, data with 17 significant
/// digits.
#[derive(Clone, Copy, Debug)]
pub enum Cell {
    Int(i64),
    Num(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => format!("{v}"),
            Cell::Num(v) => format!("{v:.16e}"),
        }
    }
}

/// A finished run: the table for CSV plus the grid/values split for
/// JSON, with the parameters that produced it.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub command: &'static str,
    pub params: Vec<(&'static str, ParamValue)>,
    pub grid: Vec<Axis>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub values: Vec<f64>,
    pub truncation_deficit: f64,
}

/// JSON form of an artifact; field order is the on-disk key order.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct JsonArtifact {
    pub command: String,
    pub params: serde_json::Map<String, serde_json::Value>,
    pub grid: Vec<Axis>,
    pub values: Vec<f64>,
    pub version: String,
    pub truncation_deficit: f64,
}

const VERSION: &str = env!("CARGO_PKG_VERSION");

impl Artifact {
    /// Renders the CSV form: a `# params:` comment naming every
    /// parameter and the artifact version, a header row, then the data.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# params:");
        let _ = write!(out, " command={}", self.command);
        for (key, value) in &self.params {
            let _ = write!(out, " {key}={}", value.render());
        }
        let _ = write!(
            out,
            " truncation_deficit={} version={VERSION}\n",
            self.truncation_deficit
        );
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let rendered: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&rendered.join(","));
            out.push('\n');
        }
        out
    }

    /// Renders the JSON form.
    pub fn to_json(&self) -> String {
        let mut params = serde_json::Map::new();
        for (key, value) in &self.params {
            params.insert((*key).into(), value.to_json());
        }
        let doc = JsonArtifact {
            command: self.command.into(),
            params,
            grid: self.grid.clone(),
            values: self.values.clone(),
            version: VERSION.into(),
            truncation_deficit: self.truncation_deficit,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("artifact serializes");
        s.push('\n');
        s
    }
}

/// Writes content to the path atomically (temp file in the same
/// directory, then rename), or to stdout when no path is given.
pub fn write_output(path: Option<&Path>, content: &str) -> std::io::Result<()> {
    let Some(path) = path else {
        // A closed pipe (e.g. `| head`) is not a failure of the run.
        return match std::io::stdout().write_all(content.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            other => other,
        };
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".tmp");
    let tmp = dir.join(name);
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)
}
