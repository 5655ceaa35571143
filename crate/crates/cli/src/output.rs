use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Format;

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:?}"),
            Cell::Bool(v) => u8::from(*v).to_string(),
            Cell::Text(v) => v.clone(),
        }
    }
}

/// One experiment's result: a table plus summary values.
#[derive(Debug, Default)]
pub struct Artifact {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Value)>,
    /// Additional files written next to the main output: `(suffix, contents)`.
    pub extras: Vec<(String, String)>,
}

impl Artifact {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Artifact { columns, ..Default::default() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.summary.push((key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null)));
    }
}

pub struct Header {
    pub command: String,
    pub config: Value,
}

fn render_csv(header: &Header, art: &Artifact) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# landau {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# command: {}", header.command);
    let _ = writeln!(s, "# config: {}", header.config);
    for (k, v) in &art.summary {
        let _ = writeln!(s, "# {k}: {v}");
    }
    let _ = writeln!(s, "{}", art.columns.join(","));
    for row in &art.rows {
        let line: Vec<String> = row.iter().map(Cell::csv).collect();
        let _ = writeln!(s, "{}", line.join(","));
    }
    s
}

fn render_json(header: &Header, art: &Artifact) -> String {
    let summary: serde_json::Map<String, Value> = art.summary.iter().cloned().collect();
    let doc = json!({
        "landau": env!("CARGO_PKG_VERSION"),
        "command": header.command,
        "config": header.config,
        "summary": summary,
        "columns": art.columns,
        "rows": art.rows,
    });
    let mut s = serde_json::to_string_pretty(&doc).unwrap_or_default();
    s.push('\n');
    s
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(suffix);
    PathBuf::from(name)
}

/// Write the artifact, its extras and a `.meta.json` sidecar carrying the
/// wall time. Without a path the main output goes to standard output.
pub fn write(out: Option<&Path>, format: Format, header: &Header, art: &Artifact, wall_seconds: f64) -> std::io::Result<()> {
    let body = match format {
        Format::Csv => render_csv(header, art),
        Format::Json => render_json(header, art),
    };
    match out {
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            eprintln!("wall time: {wall_seconds:.3} s");
        }
        Some(path) => {
            std::fs::write(path, body)?;
            let mut extras = Vec::new();
            for (suffix, contents) in &art.extras {
                let p = sibling(path, suffix);
                std::fs::write(&p, contents)?;
                extras.push(p.display().to_string());
            }
            let meta = json!({
                "landau": env!("CARGO_PKG_VERSION"),
                "command": header.command,
                "config": header.config,
                "output": path.display().to_string(),
                "extras": extras,
                "wall_seconds": wall_seconds,
            });
            std::fs::write(sibling(path, ".meta.json"), serde_json::to_string_pretty(&meta).unwrap_or_default() + "\n")?;
        }
    }
    Ok(())
}
