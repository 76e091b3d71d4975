//! Tabular reports rendered as CSV, JSON, or a minimal SVG line chart.
//!
//! Every rendering starts with a header line naming the tool version, the
//! command, and its configuration, so an output file describes the run that
//! produced it.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};
use clap::ValueEnum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn from_extension(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "svg" => Some(Format::Svg),
            _ => None,
        }
    }
}

/// A curve for the SVG renderer: `(x, y)` pairs, both positive on log axes.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Report {
    pub command: String,
    pub config: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<(String, String)>,
    pub chart: Option<Chart>,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_log: bool,
    pub series: Vec<Series>,
}

impl Report {
    pub fn new(command: &str, config: Vec<(String, String)>, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
            chart: None,
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn summarize(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    fn header_line(&self) -> String {
        let mut s = format!("lazybits {} command={}", env!("CARGO_PKG_VERSION"), self.command);
        for (k, v) in &self.config {
            let _ = write!(s, " {k}={v}");
        }
        s
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => Ok(self.to_csv()),
            Format::Json => Ok(self.to_json()),
            Format::Svg => match &self.chart {
                Some(chart) => Ok(self.to_svg(chart)),
                None => bail!("command `{}` has no chart output; use csv or json", self.command),
            },
        }
    }

    fn to_csv(&self) -> String {
        let mut out = format!("# {}\n", self.header_line());
        out.push_str(&csv_line(&self.columns));
        for row in &self.rows {
            out.push_str(&csv_line(row));
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# {k}={v}");
        }
        out
    }

    fn to_json(&self) -> String {
        let mut header = format!(
            "{{\"tool\":\"lazybits\",\"version\":{},\"command\":{},\"config\":{{",
            json_str(env!("CARGO_PKG_VERSION")),
            json_str(&self.command)
        );
        header.push_str(&json_members(&self.config));
        header.push_str("}}");
        let mut out = format!("{{\"header\":{header},\n\"rows\":[");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n" } else { ",\n" });
            let pairs: Vec<(String, String)> = self.columns.iter().cloned().zip(row.iter().cloned()).collect();
            let _ = write!(out, "{{{}}}", json_members(&pairs));
        }
        out.push_str("\n],\n\"summary\":{");
        out.push_str(&json_members(&self.summary));
        out.push_str("}}\n");
        out
    }

    fn to_svg(&self, chart: &Chart) -> String {
        render_svg(&self.header_line(), chart)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_line(fields: &[String]) -> String {
    let mut line = fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

fn json_str(s: &str) -> String {
    serde_json::Value::String(s.to_string()).to_string()
}

/// Emits numeric-looking text verbatim as a JSON number so CSV and JSON carry
/// the same digits.
fn json_value(s: &str) -> String {
    if is_json_number(s) {
        s.to_string()
    } else {
        json_str(s)
    }
}

fn is_json_number(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if b.get(i) == Some(&b'-') {
        i += 1;
    }
    let int_start = i;
    while b.get(i).is_some_and(u8::is_ascii_digit) {
        i += 1;
    }
    let int_len = i - int_start;
    if int_len == 0 || (int_len > 1 && b[int_start] == b'0') {
        return false;
    }
    if b.get(i) == Some(&b'.') {
        i += 1;
        let start = i;
        while b.get(i).is_some_and(u8::is_ascii_digit) {
            i += 1;
        }
        if i == start {
            return false;
        }
    }
    if matches!(b.get(i), Some(b'e' | b'E')) {
        i += 1;
        if matches!(b.get(i), Some(b'+' | b'-')) {
            i += 1;
        }
        let start = i;
        while b.get(i).is_some_and(u8::is_ascii_digit) {
            i += 1;
        }
        if i == start {
            return false;
        }
    }
    i == b.len()
}

fn json_members(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(k, v)| format!("{}:{}", json_str(k), json_value(v)))
        .collect::<Vec<_>>()
        .join(",")
}

const PALETTE: [&str; 6] = ["#d62728", "#2ca02c", "#9467bd", "#1f77b4", "#ff7f0e", "#8c564b"];

fn render_svg(header: &str, chart: &Chart) -> String {
    let (w, h) = (720.0, 480.0);
    let (left, right, top, bottom) = (70.0, 170.0, 40.0, 50.0);
    let tx = |v: f64| if chart.log_log { v.log10() } else { v };
    let pts: Vec<(f64, f64)> = chart
        .series
        .iter()
        .flat_map(|s| s.points.iter().map(|&(x, y)| (tx(x), tx(y))))
        .collect();
    let fold = |f: fn(f64, f64) -> f64, init: f64, sel: fn(&(f64, f64)) -> f64| pts.iter().map(sel).fold(init, f);
    let (mut x0, mut x1) = (fold(f64::min, f64::INFINITY, |p| p.0), fold(f64::max, f64::NEG_INFINITY, |p| p.0));
    let (mut y0, mut y1) = (fold(f64::min, f64::INFINITY, |p| p.1), fold(f64::max, f64::NEG_INFINITY, |p| p.1));
    if !(x1 > x0) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if !(y1 > y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let esc = |s: &str| s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace("--", "-&#45;");
    let mut out = format!("<!-- {} -->\n", header.replace("--", "- -"));
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(out, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"24\" font-size=\"15\">{}</text>",
        left,
        esc(&chart.title)
    );
    let (ax0, ax1, ay0, ay1) = (px(x0), px(x1), py(y0), py(y1));
    let _ = writeln!(
        out,
        "<path d=\"M{ax0:.1},{ay1:.1} L{ax0:.1},{ay0:.1} L{ax1:.1},{ay0:.1}\" fill=\"none\" stroke=\"black\"/>"
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let lab = |v: f64| {
            let v = if chart.log_log { 10f64.powf(v) } else { v };
            format_tick(v)
        };
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            px(fx),
            ay0 + 18.0,
            lab(fx)
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            ax0 - 6.0,
            py(fy) + 4.0,
            lab(fy)
        );
    }
    let scale = if chart.log_log { " (log)" } else { "" };
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}{scale}</text>",
        (ax0 + ax1) / 2.0,
        h - 12.0,
        esc(&chart.x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.1}\" transform=\"rotate(-90 16 {:.1})\" text-anchor=\"middle\">{}{scale}</text>",
        (ay0 + ay1) / 2.0,
        (ay0 + ay1) / 2.0,
        esc(&chart.y_label)
    );
    for (i, s) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let d = s
            .points
            .iter()
            .enumerate()
            .map(|(j, &(x, y))| format!("{}{:.2},{:.2}", if j == 0 { "M" } else { "L" }, px(tx(x)), py(tx(y))))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(out, "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>");
        let ly = top + 20.0 * i as f64 + 10.0;
        let lx = w - right + 15.0;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            lx + 20.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            lx + 26.0,
            ly + 4.0,
            esc(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn format_tick(v: f64) -> String {
    if v.abs() >= 1000.0 || (v != 0.0 && v.abs() < 0.01) {
        format!("{v:.2e}")
    } else if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.2}")
    }
}
