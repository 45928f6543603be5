//! Deterministic CSV, JSON and SVG writers.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::config::Format;

/// Fixed 17-significant-digit scientific notation.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => num(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn value(&self) -> Option<f64> {
        match self {
            Cell::Num(v) if v.is_finite() => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub comments: Vec<String>,
    /// (column name, unit)
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[(&str, &str)]) -> Self {
        Self {
            name: name.into(),
            comments: Vec::new(),
            columns: columns.iter().map(|(c, u)| (c.to_string(), u.to_string())).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(mut self, line: impl Into<String>) -> Self {
        self.comments.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            let _ = writeln!(s, "# {c}");
        }
        let units: Vec<String> = self.columns.iter().map(|(c, u)| format!("{c} [{u}]")).collect();
        let _ = writeln!(s, "# units: {}", units.join(", "));
        let names: Vec<&str> = self.columns.iter().map(|(c, _)| c.as_str()).collect();
        let _ = writeln!(s, "{}", names.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    /// Polyline plot of every numeric column against the first.
    pub fn to_svg(&self) -> String {
        svg_plot(self)
    }
}

/// Pretty JSON with sorted keys and floats in the same notation as the CSVs.
pub fn json(value: &Value) -> String {
    let mut s = String::new();
    write_json(value, 0, &mut s);
    s.push('\n');
    s
}

fn write_json(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                match n.as_f64() {
                    Some(x) if x.is_finite() => out.push_str(&num(x)),
                    _ => out.push_str("null"),
                }
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            let keys: BTreeSet<&String> = map.keys().collect();
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_json(&map[*k], indent + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Collected results of one command; nothing touches disk until `write`.
#[derive(Debug, Default)]
pub struct Outputs {
    pub tables: Vec<Table>,
    pub documents: Vec<(String, Value)>,
}

impl Outputs {
    pub fn table(&mut self, t: Table) {
        self.tables.push(t);
    }

    pub fn document(&mut self, name: impl Into<String>, v: Value) {
        self.documents.push((name.into(), v));
    }

    /// Rendered (file name, contents) pairs in a fixed order.
    pub fn render(&self, formats: &BTreeSet<Format>) -> Vec<(String, String)> {
        let mut files = Vec::new();
        if formats.contains(&Format::Csv) {
            files.extend(self.tables.iter().map(|t| (format!("{}.csv", t.name), t.to_csv())));
        }
        if formats.contains(&Format::Json) {
            files.extend(self.documents.iter().map(|(n, v)| (format!("{n}.json"), json(v))));
        }
        if formats.contains(&Format::Svg) {
            files.extend(
                self.tables.iter().filter(|t| t.rows.len() > 1).map(|t| (format!("{}.svg", t.name), t.to_svg())),
            );
        }
        files
    }

    pub fn write(&self, dir: &Path, formats: &BTreeSet<Format>) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (name, text) in self.render(formats) {
            let p = dir.join(name);
            std::fs::write(&p, text)?;
            paths.push(p);
        }
        Ok(paths)
    }
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return None;
    }
    if hi > lo {
        Some((lo, hi))
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        Some((lo - pad, hi + pad))
    }
}

fn svg_plot(t: &Table) -> String {
    let numeric: Vec<usize> = (1..t.columns.len()).filter(|&c| t.rows.iter().any(|r| r[c].value().is_some())).collect();
    let xs = t.rows.iter().filter_map(|r| r[0].value());
    let ys = t.rows.iter().flat_map(|r| numeric.iter().filter_map(|&c| r[c].value()));
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#, W / 2.0, t.name);
    let (Some((x0, x1)), Some((y0, y1))) = (range(xs), range(ys)) else {
        s.push_str("</svg>\n");
        return s;
    };
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 1.5 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 1.5 * MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{:.2} {:.2} H{:.2} M{:.2} {:.2} V{:.2}" stroke="black" fill="none"/>"#,
        MARGIN,
        H - MARGIN,
        W - 0.5 * MARGIN,
        MARGIN,
        H - MARGIN,
        0.5 * MARGIN
    );
    for tx in nice_ticks(x0, x1) {
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/><text x="{0:.2}" y="{3:.2}" text-anchor="middle">{4}</text>"#,
            px(tx),
            H - MARGIN,
            H - MARGIN + 5.0,
            H - MARGIN + 18.0,
            tick_label(tx)
        );
    }
    for ty in nice_ticks(y0, y1) {
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="black"/><text x="{3:.2}" y="{4:.2}" text-anchor="end">{5}</text>"#,
            MARGIN - 5.0,
            py(ty),
            MARGIN,
            MARGIN - 8.0,
            py(ty) + 4.0,
            tick_label(ty)
        );
    }
    let (xname, xunit) = &t.columns[0];
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{xname} [{xunit}]</text>"#, W / 2.0, H - 15.0);
    for (k, &c) in numeric.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = t
            .rows
            .iter()
            .filter_map(|r| Some((r[0].value()?, r[c].value()?)))
            .map(|(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" points="{}"/>"#, pts.join(" "));
        let (name, unit) = &t.columns[c];
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}">{name} [{unit}]</text>"#,
            W - 1.5 * MARGIN - 80.0,
            0.5 * MARGIN + 14.0 * (k as f64 + 1.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e-3 && v.abs() < 1e4 {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_is_fixed() {
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(-0.25), "-2.5000000000000000e-1");
        assert_eq!(num(f64::NAN), "nan");
    }

    #[test]
    fn json_sorts_keys() {
        let v = serde_json::json!({"b": 1.5, "a": [1, "x", null], "c": {}});
        assert_eq!(
            json(&v),
            "{\n  \"a\": [\n    1,\n    \"x\",\n    null\n  ],\n  \"b\": 1.5000000000000000e0,\n  \"c\": {}\n}\n"
        );
        let back: Value = serde_json::from_str(&json(&v)).unwrap();
        assert_eq!(back["b"], 1.5);
    }

    #[test]
    fn csv_and_svg() {
        let mut t = Table::new("demo", &[("E", "hartree"), ("y", "rad"), ("status", "-")]).comment("demo table");
        t.push(vec![0.5.into(), 1.0.into(), "ok".into()]);
        t.push(vec![1.0.into(), 2.0.into(), "ok".into()]);
        let csv = t.to_csv();
        assert!(csv.starts_with("# demo table\n# units: E [hartree], y [rad], status [-]\nE,y,status\n"));
        let svg = t.to_svg();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg, t.to_svg());
    }
}
