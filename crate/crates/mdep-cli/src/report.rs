//! Report envelope and emitters.
//!
//! Every command produces a `meta` header (command name, version, effective
//! seed for randomized commands, wall-clock stamp) and a `report` body. JSON
//! output nests both; CSV output flattens the body to `key,value` rows plus
//! one tabular block per array of flat records, with the header folded into
//! a leading comment line. The timestamp lives only in the JSON header, so
//! identical invocations are byte-identical apart from that one field.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

/// Report header shared by every command.
#[derive(Debug, Serialize)]
pub struct Meta {
    pub command: &'static str,
    pub version: &'static str,
    /// Effective root seed; absent for fully deterministic commands.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Wall-clock stamp, the only field allowed to differ between identical
    /// invocations.
    pub timestamp_ms: u64,
}

impl Meta {
    pub fn new(command: &'static str, seed: Option<u64>) -> Self {
        let timestamp_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        Meta { command, version: env!("CARGO_PKG_VERSION"), seed, timestamp_ms }
    }
}

/// Output format selector.
#[derive(Debug, Copy, Clone, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Renders the full report in the chosen format, trailing newline included.
pub fn render(format: Format, meta: &Meta, report: &Value) -> String {
    match format {
        Format::Json => {
            let doc = serde_json::json!({ "meta": meta, "report": report });
            let mut text =
                serde_json::to_string_pretty(&doc).expect("reports contain only plain JSON");
            text.push('\n');
            text
        }
        Format::Csv => render_csv(meta, report),
    }
}

/// A tabular block: source path, column headers, stringified rows.
type Table = (String, Vec<String>, Vec<Vec<String>>);

fn render_csv(meta: &Meta, report: &Value) -> String {
    let mut out = format!("# mdep v{} command={}", meta.version, meta.command);
    if let Some(seed) = meta.seed {
        let _ = write!(out, " seed={seed}");
    }
    out.push('\n');

    let mut scalars: Vec<(String, String)> = Vec::new();
    let mut tables: Vec<Table> = Vec::new();
    flatten("", report, &mut scalars, &mut tables);

    out.push_str("key,value\n");
    for (key, value) in &scalars {
        let _ = writeln!(out, "{},{}", escape(key), escape(value));
    }
    for (path, headers, rows) in &tables {
        out.push('\n');
        let _ = writeln!(out, "# {path}");
        let _ = writeln!(out, "{}", join_escaped(headers));
        for row in rows {
            let _ = writeln!(out, "{}", join_escaped(row));
        }
    }
    out
}

fn join_escaped(cells: &[String]) -> String {
    cells.iter().map(|c| escape(c)).collect::<Vec<_>>().join(",")
}

/// Walks the report: objects extend the dotted path, arrays of flat records
/// become tables, other arrays index into the path, scalars become rows.
fn flatten(prefix: &str, value: &Value, scalars: &mut Vec<(String, String)>, tables: &mut Vec<Table>) {
    match value {
        Value::Object(map) => {
            for (key, child) in map {
                let path =
                    if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                flatten(&path, child, scalars, tables);
            }
        }
        Value::Array(items) if items.is_empty() => {
            scalars.push((prefix.to_string(), String::new()));
        }
        Value::Array(items) => {
            if let Some(table) = as_table(prefix, items) {
                tables.push(table);
            } else {
                for (i, child) in items.iter().enumerate() {
                    flatten(&format!("{prefix}.{i}"), child, scalars, tables);
                }
            }
        }
        other => scalars.push((prefix.to_string(), scalar_text(other))),
    }
}

/// Accepts an array as a table only when every element is an object of
/// scalars, so that each element fits on one row.
fn as_table(path: &str, items: &[Value]) -> Option<Table> {
    let records: Vec<&serde_json::Map<String, Value>> =
        items.iter().map(Value::as_object).collect::<Option<_>>()?;
    if records.iter().any(|r| r.values().any(|v| v.is_object() || v.is_array())) {
        return None;
    }
    let mut headers: Vec<String> = records.iter().flat_map(|r| r.keys().cloned()).collect();
    headers.sort();
    headers.dedup();
    let rows = records
        .iter()
        .map(|r| {
            headers
                .iter()
                .map(|h| r.get(h).map(scalar_text).unwrap_or_default())
                .collect()
        })
        .collect();
    Some((path.to_string(), headers, rows))
}

fn scalar_text(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Standard CSV quoting: fields containing a comma, quote, or newline are
/// wrapped in double quotes with inner quotes doubled.
fn escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}
