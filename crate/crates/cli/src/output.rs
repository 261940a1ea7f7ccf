use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use tempfile::NamedTempFile;

use crate::config::Format;
use crate::CliError;

/// Numeric table with named columns. Missing values are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

/// 17 significant digits, so every f64 round-trips.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "Infinity".into() } else { "-Infinity".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// JSON has no NaN or infinity; those become `null`.
pub fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(|&x| json_f64(x)).collect()))
            .collect();
        let columns = self.columns.iter().map(|&c| Value::from(c)).collect();
        let mut m = Map::new();
        m.insert("columns".into(), Value::Array(columns));
        m.insert("rows".into(), Value::Array(rows));
        Value::Object(m)
    }
}

/// Flattens a JSON object into dotted keys for a one-row CSV.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        Value::Number(n) => out.push((prefix.into(), fmt_f64(n.as_f64().unwrap_or(f64::NAN)))),
        Value::Null => out.push((prefix.into(), "NaN".into())),
        Value::Bool(b) => out.push((prefix.into(), b.to_string())),
        Value::String(s) => out.push((prefix.into(), s.clone())),
    }
}

pub fn report_csv(v: &Value) -> String {
    let mut cells = Vec::new();
    flatten("", v, &mut cells);
    let (keys, vals): (Vec<_>, Vec<_>) = cells.into_iter().unzip();
    format!("{}\n{}\n", keys.join(","), vals.join(","))
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub enum Body {
    Table(Table),
    Report(Value),
}

impl Body {
    pub fn render(&self, format: Format) -> String {
        match (self, format) {
            (Body::Table(t), Format::Csv) => t.to_csv(),
            (Body::Table(t), Format::Json) => json_text(&t.to_json()),
            (Body::Report(v), Format::Csv) => report_csv(v),
            (Body::Report(v), Format::Json) => json_text(v),
        }
    }
}

/// Gnuplot script for a CSV table: line plots of every column against the
/// first, or a heat map when `surface` is set (three columns `x, y, z`).
pub fn gnuplot_script(table: &Table, data: &Path, surface: bool) -> String {
    let path = data.display().to_string().replace('\'', "''");
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset key outside\n");
    let _ = writeln!(s, "set xlabel '{}'", table.columns[0]);
    if surface {
        let _ = writeln!(s, "set ylabel '{}'", table.columns[1]);
        let _ = writeln!(s, "set cblabel '{}'", table.columns[2]);
        s.push_str("set view map\nset pm3d map\n");
        let _ = writeln!(s, "splot '{path}' using 1:2:3 skip 1 with pm3d notitle");
    } else {
        let plots: Vec<String> = (1..table.columns.len())
            .map(|i| {
                let src = if i == 1 { format!("'{path}'") } else { "''".to_string() };
                format!("{src} using 1:{} skip 1 with lines title '{}'", i + 1, table.columns[i])
            })
            .collect();
        let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    }
    s
}

/// Files to write together. Each goes to a temporary file in its target
/// directory first, so a failure leaves no partial output behind.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    pub fn add(&mut self, path: PathBuf, contents: String) {
        self.files.push((path, contents));
    }

    pub fn commit(self) -> Result<(), CliError> {
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, contents) in self.files {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
            let mut tmp = NamedTempFile::new_in(&dir).map_err(io)?;
            tmp.write_all(contents.as_bytes()).map_err(io)?;
            tmp.as_file().sync_all().map_err(io)?;
            staged.push((tmp, path));
        }
        for (tmp, path) in staged {
            tmp.persist(&path)
                .map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
        }
        Ok(())
    }
}
