//! Tables, CSV emission and minimal standalone SVG plots.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(o: Option<T>) -> Self {
        o.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.headers.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros removed,
/// exponent form outside `[1e-4, 1e17)`. Parsing the output gives back the
/// same `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{x:.*}", (16 - exp) as usize)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Header row plus one record per row, RFC 4180 quoting, LF line ends.
pub fn emit_csv<W: Write>(table: &Table, sink: W) -> Result<()> {
    if table.headers.is_empty() {
        return Err(Error::Empty("table without columns"));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(&table.headers)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Axes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_log: bool,
    pub y_log: bool,
}

pub const SVG_WIDTH: f64 = 640.0;
pub const SVG_HEIGHT: f64 = 400.0;
pub const SVG_MARGIN: f64 = 60.0;

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct AxisMap {
    lo: f64,
    hi: f64,
    log: bool,
    from: f64,
    to: f64,
}

impl AxisMap {
    fn new(values: impl Iterator<Item = f64>, log: bool, from: f64, to: f64) -> Result<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            if log && !(v > 0.0) {
                return Err(Error::InvalidParams(format!("log axis needs positive values, got {v}")));
            }
            let t = if log { v.log10() } else { v };
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if hi <= lo {
            lo -= 0.5;
            hi += 0.5;
        }
        Ok(AxisMap { lo, hi, log, from, to })
    }

    fn map(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        self.from + (t - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }
}

/// Standalone SVG line plot of one series with a circle marker
/// (`class="pt"`) per point.
pub fn emit_svg<W: Write>(series: &Series, axes: &Axes, mut sink: W) -> Result<()> {
    if series.points.is_empty() {
        return Err(Error::Empty("series without points"));
    }
    let xs = AxisMap::new(
        series.points.iter().map(|p| p.0),
        axes.x_log,
        SVG_MARGIN,
        SVG_WIDTH - SVG_MARGIN,
    )?;
    let ys = AxisMap::new(
        series.points.iter().map(|p| p.1),
        axes.y_log,
        SVG_HEIGHT - SVG_MARGIN,
        SVG_MARGIN,
    )?;
    let mut s = String::new();
    let (w, h, m) = (SVG_WIDTH, SVG_HEIGHT, SVG_MARGIN);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="16">{}</text>"#,
        w / 2.0,
        m / 2.0,
        xml_escape(&axes.title)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{m}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        h - m,
        w - m,
        h - m
    );
    let _ = writeln!(s, r#"<line x1="{m}" y1="{m}" x2="{m}" y2="{}" stroke="black"/>"#, h - m);
    let log_tag = |log: bool| if log { " (log)" } else { "" };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}{}</text>"#,
        w / 2.0,
        h - m / 4.0,
        xml_escape(&axes.x_label),
        log_tag(axes.x_log)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 {} {})">{}{}</text>"#,
        m / 3.0,
        h / 2.0,
        m / 3.0,
        h / 2.0,
        xml_escape(&axes.y_label),
        log_tag(axes.y_log)
    );
    let coords: Vec<(f64, f64)> = series.points.iter().map(|&(x, y)| (xs.map(x), ys.map(y))).collect();
    let path: Vec<String> = coords.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
        path.join(" ")
    );
    for ((x, y), (dx, dy)) in coords.iter().zip(&series.points) {
        let _ = writeln!(
            s,
            r#"<circle class="pt" cx="{x:.3}" cy="{y:.3}" r="4" fill="steelblue"><title>({}, {})</title></circle>"#,
            format_float(*dx),
            format_float(*dy)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12">{}</text>"#,
        w - m - 120.0,
        m,
        xml_escape(&series.label)
    );
    s.push_str("</svg>\n");
    sink.write_all(s.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn float_format_examples() {
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(2.0), "2");
        assert_eq!(format_float(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(format_float(1e20), "1e+20");
        assert_eq!(format_float(1.5e-7), "1.4999999999999999e-07");
        assert_eq!(format_float(-63245.553203367587), "-63245.553203367585");
        assert_eq!(format_float(0.0), "0");
    }

    proptest! {
        #[test]
        fn floats_round_trip(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back: f64 = format_float(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn one_row_round_trips() {
        let mut t = Table::new(["n", "metric", "value"]);
        t.push(vec![100usize.into(), "a,\"quoted\"".into(), 0.1.into()]);
        let mut out = Vec::new();
        emit_csv(&t, &mut out).unwrap();
        let text = String::from_utf8(out.clone()).unwrap();
        assert_eq!(text, "n,metric,value\n100,\"a,\"\"quoted\"\"\",0.10000000000000001\n");
        let mut rd = csv::Reader::from_reader(out.as_slice());
        let rec = rd.records().next().unwrap().unwrap();
        assert_eq!(&rec[1], "a,\"quoted\"");
        assert_eq!(rec[2].parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn svg_markers_on_log_axis() {
        let s = Series {
            label: "max".into(),
            points: vec![(1e4, 1.0), (1e5, 2.0), (1e6, 4.0)],
        };
        let axes = Axes {
            x_log: true,
            ..Default::default()
        };
        let mut out = Vec::new();
        emit_svg(&s, &axes, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let cx: Vec<f64> = text
            .match_indices("class=\"pt\" cx=\"")
            .map(|(i, m)| {
                let rest = &text[i + m.len()..];
                rest[..rest.find('"').unwrap()].parse().unwrap()
            })
            .collect();
        assert_eq!(cx.len(), 3);
        // equal decades -> equal spacing from left margin to right margin
        assert!((cx[0] - SVG_MARGIN).abs() < 1e-3);
        assert!((cx[1] - SVG_WIDTH / 2.0).abs() < 1e-3);
        assert!((cx[2] - (SVG_WIDTH - SVG_MARGIN)).abs() < 1e-3);
        assert!(emit_svg(&Series { label: String::new(), points: vec![] }, &axes, Vec::new()).is_err());
    }
}
