//! Report shapes and the three output renderers. JSON output is fully
//! deterministic: field order is fixed and timing is only attached when
//! explicitly requested.

use serde::Serialize;
use serde_json::{Map, Value};

/// Outcome of one command or batch job: an echo of what ran, result rows
/// in declaration order, and any notes or warnings picked up on the way.
#[derive(Debug, Serialize)]
pub struct Report {
    pub job: Value,
    pub results: Vec<Row>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
    /// Not part of the wire format: drives the process exit code.
    #[serde(skip)]
    pub failed: bool,
}

impl Report {
    pub fn new(job: Value) -> Self {
        Report {
            job,
            results: Vec::new(),
            notes: Vec::new(),
            warnings: Vec::new(),
            timing_ms: None,
            failed: false,
        }
    }
}

/// One result row: the swept parameter values (empty when nothing is
/// swept) and the command-specific payload, flattened.
#[derive(Debug, Serialize)]
pub struct Row {
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub params: Map<String, Value>,
    #[serde(flatten)]
    pub value: Map<String, Value>,
}

impl Row {
    pub fn new() -> Self {
        Row {
            params: Map::new(),
            value: Map::new(),
        }
    }

    pub fn param(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), v.into());
        self
    }

    pub fn field(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.value.insert(key.to_string(), v.into());
        self
    }
}

impl Default for Row {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug)]
pub struct RenderOpts {
    pub format: Format,
    pub decimal: bool,
}

/// Renders a batch of reports in the selected format. JSON mode emits a
/// single array; the other modes emit one block per report.
pub fn render(reports: &[Report], opts: RenderOpts) -> String {
    match opts.format {
        Format::Json => serde_json::to_string_pretty(reports).expect("reports serialize"),
        Format::Table => reports
            .iter()
            .map(|r| table(r, opts.decimal))
            .collect::<Vec<_>>()
            .join("\n"),
        Format::Csv => csv(reports),
    }
}

fn columns(report: &Report) -> (Vec<String>, Vec<String>) {
    let mut param_cols = Vec::new();
    let mut value_cols = Vec::new();
    for row in &report.results {
        for k in row.params.keys() {
            if !param_cols.contains(k) {
                param_cols.push(k.clone());
            }
        }
        for k in row.value.keys() {
            if !value_cols.contains(k) {
                value_cols.push(k.clone());
            }
        }
    }
    (param_cols, value_cols)
}

fn cell_text(v: Option<&Value>, decimal: bool) -> String {
    let s = match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    };
    if decimal {
        if let Some(approx) = decimal_mark(&s) {
            return format!("{s} (~{approx})");
        }
    }
    s
}

/// A decimal approximation for a non-integer `p/q` string; `None` when
/// the cell is not such a rational.
fn decimal_mark(s: &str) -> Option<String> {
    let (num, den) = s.split_once('/')?;
    let num: f64 = num.parse().ok()?;
    let den: f64 = den.parse().ok()?;
    if den == 0.0 {
        return None;
    }
    Some(format!("{:.6}", num / den))
}

fn job_heading(job: &Value) -> String {
    let mut parts = Vec::new();
    if let Value::Object(map) = job {
        for (k, v) in map {
            let vs = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            if k == "cmd" {
                parts.insert(0, vs);
            } else {
                parts.push(format!("{k}={vs}"));
            }
        }
    }
    parts.join(" ")
}

fn table(report: &Report, decimal: bool) -> String {
    let mut out = format!("# {}\n", job_heading(&report.job));
    let (param_cols, value_cols) = columns(report);
    let headers: Vec<&String> = param_cols.iter().chain(value_cols.iter()).collect();
    if !headers.is_empty() {
        let mut grid: Vec<Vec<String>> = vec![headers.iter().map(|h| (*h).clone()).collect()];
        for row in &report.results {
            let mut cells = Vec::with_capacity(headers.len());
            for c in &param_cols {
                cells.push(cell_text(row.params.get(c), decimal));
            }
            for c in &value_cols {
                cells.push(cell_text(row.value.get(c), decimal));
            }
            grid.push(cells);
        }
        let widths: Vec<usize> = (0..headers.len())
            .map(|i| grid.iter().map(|r| r[i].len()).max().unwrap_or(0))
            .collect();
        for (ri, row) in grid.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
            if ri == 0 {
                let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                out.push_str(&rule.join("  "));
                out.push('\n');
            }
        }
    }
    for n in &report.notes {
        out.push_str(&format!("note: {n}\n"));
    }
    for w in &report.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    if let Some(ms) = report.timing_ms {
        out.push_str(&format!("time: {ms} ms\n"));
    }
    out
}

fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv(reports: &[Report]) -> String {
    let many = reports.len() > 1;
    let mut out = String::new();
    for (ji, report) in reports.iter().enumerate() {
        let (param_cols, value_cols) = columns(report);
        let mut header: Vec<String> = Vec::new();
        if many {
            header.push("job".into());
        }
        header.extend(param_cols.iter().cloned());
        header.extend(value_cols.iter().cloned());
        out.push_str(
            &header
                .iter()
                .map(|h| csv_quote(h))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
        for row in &report.results {
            let mut cells: Vec<String> = Vec::new();
            if many {
                cells.push(ji.to_string());
            }
            for c in &param_cols {
                cells.push(csv_quote(&cell_text(row.params.get(c), false)));
            }
            for c in &value_cols {
                cells.push(csv_quote(&cell_text(row.value.get(c), false)));
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
    out
}
