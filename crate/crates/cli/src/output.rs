//! CSV and SVG emission.
//!
//! CSV files are UTF-8, comma separated, LF terminated, with a header row.
//! Floats are written in shortest round-trip form so that parsing an emitted
//! file and writing it again reproduces the same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// In-memory CSV document.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
        let header = r.headers()?.iter().map(str::to_owned).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_owned).collect()))
            .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
        Ok(Self { header, rows })
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }
}

/// One boundary polyline of the region figure.
#[derive(Debug, Clone)]
pub struct Curve {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 70.0;

fn nice_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let raw = span / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

/// Standalone SVG 1.1 plot of seller boundaries `b(t)` against time, with a
/// dashed line at the strike.
pub fn region_svg(curves: &[Curve], strike: f64, t_min: f64, t_max: f64) -> String {
    let ys = curves.iter().flat_map(|c| c.points.iter().map(|p| p.1));
    let y_hi = ys.fold(strike, f64::max);
    let (y_lo, y_hi) = (strike - 0.05 * (y_hi - strike).max(1.0), y_hi + 0.05 * (y_hi - strike).max(1.0));
    let px = |t: f64| MARGIN_L + (t - t_min) / (t_max - t_min) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |s: f64| HEIGHT - MARGIN_B - (s - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    out.push_str(
        "<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" \"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n",
    );
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let (x0, x1) = (px(t_min), px(t_max));
    let (y0, y1) = (py(y_lo), py(y_hi));
    let _ = writeln!(out, "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">");
    let _ = writeln!(out, "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\"/>");
    let _ = writeln!(out, "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\"/>");
    out.push_str("</g>\n");

    out.push_str("<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n");
    for t in nice_ticks(t_min, t_max, 8) {
        let x = px(t);
        let _ = writeln!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{y0:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/><text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            y0 + 5.0,
            y0 + 20.0,
            tick_label(t)
        );
    }
    for s in nice_ticks(y_lo, y_hi, 8) {
        let y = py(s);
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0:.2}\" y2=\"{y:.2}\" stroke=\"black\"/><text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0,
            tick_label(s)
        );
    }
    let _ =
        writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">t</text>", (x0 + x1) / 2.0, HEIGHT - 20.0);
    let _ = writeln!(
        out,
        "<text x=\"20\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.2})\">S</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    out.push_str("</g>\n");

    let ky = py(strike);
    let _ = writeln!(
        out,
        "<line x1=\"{x0:.2}\" y1=\"{ky:.2}\" x2=\"{x1:.2}\" y2=\"{ky:.2}\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>"
    );
    for (i, c) in curves.iter().enumerate() {
        if !c.points.is_empty() {
            let pts: Vec<String> = c.points.iter().map(|&(t, b)| format!("{:.2},{:.2}", px(t), py(b))).collect();
            let _ = writeln!(
                out,
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>",
                c.color,
                pts.join(" ")
            );
        }
        let ly = MARGIN_T + 18.0 * i as f64;
        let lx = x1 - 200.0;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{}\" stroke-width=\"2\"/><text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            lx + 25.0,
            c.color,
            lx + 30.0,
            ly + 4.0,
            escape(&c.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
