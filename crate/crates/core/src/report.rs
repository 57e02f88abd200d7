//! Number formatting and case tables.

use serde::Serialize;

use crate::cases::CaseResult;
use crate::error::{Error, Result};

/// Decimal with 12 fractional digits, trailing zeros trimmed.
pub fn fmt_num(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let mut s = format!("{:.12}", v);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

const SURD_RADICANDS: [u32; 6] = [1, 2, 3, 5, 6, 7];
const SURD_TOL: f64 = 1e-9;

/// Recognizes `p/q * sqrt(r)` with small `q` and square-free `r`.
pub fn surd(v: f64) -> Option<String> {
    if !v.is_finite() {
        return None;
    }
    if v == 0.0 {
        return Some("0".into());
    }
    for r in SURD_RADICANDS {
        let root = (r as f64).sqrt();
        for q in 1..=8u32 {
            let p = v / root * q as f64;
            let pr = p.round();
            if (p - pr).abs() < SURD_TOL * q as f64 && pr != 0.0 && pr.abs() < 1e6 {
                let (p, q) = reduce(pr as i64, q as i64);
                return Some(render_surd(p, q, r));
            }
        }
    }
    None
}

fn reduce(p: i64, q: i64) -> (i64, i64) {
    let (mut a, mut b) = (p.abs(), q);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    (p / a, q / a)
}

fn render_surd(p: i64, q: i64, r: u32) -> String {
    let sign = if p < 0 { "-" } else { "" };
    let p = p.abs();
    let rad = format!("sqrt({r})");
    let num = match (p, r) {
        (_, 1) => p.to_string(),
        (1, _) => rad,
        _ => format!("{p}*{rad}"),
    };
    if q == 1 {
        format!("{sign}{num}")
    } else {
        format!("{sign}{num}/{q}")
    }
}

/// Decimal plus surd form when one is recognized.
pub fn fmt_with_surd(v: f64) -> String {
    match surd(v) {
        Some(s) if s != fmt_num(v) => format!("{} ({s})", fmt_num(v)),
        _ => fmt_num(v),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Markdown,
    Csv,
    Json,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "md" | "markdown" => Ok(TableFormat::Markdown),
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            _ => Err(Error::InvalidArgument(format!("unknown table format {s:?}"))),
        }
    }
}

/// One flattened table row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub case: String,
    pub title: String,
    pub expression: String,
    pub classical_min: String,
    pub classical_max: String,
    pub quantum_lower: String,
    pub seesaw: String,
    pub sos: String,
    pub checks: String,
    pub status: String,
}

const COLUMNS: [&str; 10] = [
    "case",
    "title",
    "expression",
    "classical_min",
    "classical_max",
    "quantum_lower",
    "seesaw",
    "sos",
    "checks",
    "status",
];

impl TableRow {
    pub fn from_case(c: &CaseResult) -> Self {
        let opt = |v: Option<f64>| v.map(fmt_with_surd).unwrap_or_default();
        let b = c.bounds.as_ref();
        let or_check = |v: String, q: &str| {
            if v.is_empty() {
                c.checks.iter().find(|k| k.quantity == q).map(|k| k.observed.clone()).unwrap_or_default()
            } else {
                v
            }
        };
        let passed = c.checks.iter().filter(|k| k.passed).count();
        TableRow {
            case: c.name.clone(),
            title: c.title.clone(),
            expression: c.expressions.join(" ; "),
            classical_min: or_check(opt(b.map(|b| b.classical_min)), "classical min"),
            classical_max: or_check(opt(b.map(|b| b.classical_max)), "classical max"),
            quantum_lower: or_check(opt(b.map(|b| b.quantum_lower)), "quantum lower"),
            seesaw: opt(b.and_then(|b| b.seesaw_value)),
            sos: b
                .map(|b| serde_json::to_value(b.sos_status).expect("enum").as_str().unwrap_or("").to_string())
                .unwrap_or_default(),
            checks: format!("{passed}/{}", c.checks.len()),
            status: if c.passed { "pass" } else { "FAIL" }.into(),
        }
    }

    fn cells(&self) -> [&str; 10] {
        [
            &self.case,
            &self.title,
            &self.expression,
            &self.classical_min,
            &self.classical_max,
            &self.quantum_lower,
            &self.seesaw,
            &self.sos,
            &self.checks,
            &self.status,
        ]
    }
}

fn md_cell(s: &str) -> String {
    s.replace('|', "\\|")
}

fn md_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&format!("| {} |\n", header.join(" | ")));
    out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
    for r in rows {
        let cells: Vec<String> = r.iter().map(|c| md_cell(c)).collect();
        out.push_str(&format!("| {} |\n", cells.join(" | ")));
    }
    out
}

/// One row per case, in the order given.
pub fn emit_table(cases: &[CaseResult], format: TableFormat) -> Result<String> {
    let rows: Vec<TableRow> = cases.iter().map(TableRow::from_case).collect();
    match format {
        TableFormat::Markdown => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| r.cells().iter().map(|c| c.to_string()).collect())
                .collect();
            Ok(md_table(&COLUMNS, &body))
        }
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::InvalidArgument(e.to_string());
            w.write_record(COLUMNS).map_err(io)?;
            for r in &rows {
                w.write_record(r.cells()).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        TableFormat::Json => {
            let mut s = serde_json::to_string_pretty(&rows).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Transposed layout: one column per case, rows for the logical operator,
/// the expression and its bounds.
pub fn emit_construction_table(cases: &[CaseResult]) -> String {
    let mut header = vec!["".to_string()];
    header.extend(cases.iter().map(|c| c.name.clone()));
    let row = |label: &str, f: &dyn Fn(&CaseResult) -> String| {
        let mut r = vec![label.to_string()];
        r.extend(cases.iter().map(f));
        r
    };
    let bound = |c: &CaseResult, f: fn(&crate::bounds::BoundsReport) -> f64| {
        c.bounds.as_ref().map(|b| fmt_with_surd(f(b))).unwrap_or_default()
    };
    let rows = vec![
        row("logical operator", &|c| c.logical.clone().unwrap_or_default()),
        row("expression", &|c| c.expressions.join(" ; ")),
        row("classical max", &|c| bound(c, |b| b.classical_max)),
        row("quantum", &|c| bound(c, |b| b.quantum_lower)),
    ];
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    md_table(&h, &rows)
}
