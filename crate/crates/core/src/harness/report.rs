//! CSV, markdown and SVG output for experiment reports.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numeric::sig6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

/// A labelled numeric table. CSV cells carry 6 significant digits,
/// markdown cells `decimals` decimals.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportTable {
    pub title: String,
    pub columns: Vec<String>,
    pub row_labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub decimals: usize,
}

impl ReportTable {
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn escape_md(s: &str) -> String {
    s.replace('|', "\\|")
}

pub fn render_report(table: &ReportTable, format: ReportFormat) -> Result<String> {
    if table.is_empty() {
        return Err(Error::InvalidArgument("report has no rows".into()));
    }
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.columns)?;
            for (label, row) in table.row_labels.iter().zip(&table.values) {
                let mut rec = vec![label.clone()];
                rec.extend(row.iter().map(|&v| sig6(v)));
                w.write_record(&rec)?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Error::InvalidArgument(format!("csv buffer: {e}")))?;
            out = String::from_utf8(bytes).expect("csv output is UTF-8");
        }
        ReportFormat::Markdown => {
            let _ = writeln!(out, "### {}\n", table.title);
            let head: Vec<String> = table.columns.iter().map(|c| escape_md(c)).collect();
            let _ = writeln!(out, "| {} |", head.join(" | "));
            let _ = writeln!(out, "|{}", vec!["---:|"; head.len()].concat());
            for (label, row) in table.row_labels.iter().zip(&table.values) {
                let cells: Vec<String> = row
                    .iter()
                    .map(|v| format!("{:.*}", table.decimals, v))
                    .collect();
                let _ = writeln!(out, "| {} | {} |", escape_md(label), cells.join(" | "));
            }
        }
    }
    Ok(out)
}

pub fn emit_report(table: &ReportTable, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let text = render_report(table, format)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// One curve of a line plot.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLOURS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Static SVG line plot with a base-10 logarithmic x axis and one panel per
/// series stacked vertically (each with its own y range).
pub fn render_log_x_plot(title: &str, x_label: &str, series: &[Series]) -> Result<String> {
    let xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    if xs.is_empty() || xs.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidArgument("log-x plot needs positive x values".into()));
    }
    let lx_min = xs.iter().cloned().fold(f64::INFINITY, f64::min).log10().floor();
    let lx_max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).log10().ceil().max(lx_min + 1.0);
    let panel_h = SVG_H;
    let height = panel_h * series.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, s) in series.iter().enumerate() {
        let top = k as f64 * panel_h;
        let ys: Vec<f64> = s.points.iter().map(|p| p.1).collect();
        let mut y_min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut y_max = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if y_max - y_min < 1e-12 {
            y_min -= 1.0;
            y_max += 1.0;
        }
        let sx = |x: f64| MARGIN + (x.log10() - lx_min) / (lx_max - lx_min) * (SVG_W - 2.0 * MARGIN);
        let sy = |y: f64| top + panel_h - MARGIN - (y - y_min) / (y_max - y_min) * (panel_h - 2.0 * MARGIN);
        let (x0, x1) = (MARGIN, SVG_W - MARGIN);
        let (yb, yt) = (top + panel_h - MARGIN, top + MARGIN);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{} : {}</text>"#,
            SVG_W / 2.0,
            top + MARGIN / 2.0,
            title,
            s.name
        );
        let _ = writeln!(svg, r#"<line x1="{x0}" y1="{yb}" x2="{x1}" y2="{yb}" stroke="black"/>"#);
        let _ = writeln!(svg, r#"<line x1="{x0}" y1="{yb}" x2="{x0}" y2="{yt}" stroke="black"/>"#);
        let mut e = lx_min as i32;
        while e as f64 <= lx_max {
            let x = sx(10f64.powi(e));
            let _ = writeln!(svg, r#"<line x1="{x}" y1="{yb}" x2="{x}" y2="{}" stroke="black"/>"#, yb + 5.0);
            let _ = writeln!(svg, r#"<text x="{x}" y="{}" text-anchor="middle">1e{e}</text>"#, yb + 18.0);
            e += 1;
        }
        for (v, y) in [(y_min, yb), (y_max, yt)] {
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                y + 4.0,
                sig6(v)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
            SVG_W / 2.0,
            yb + 36.0
        );
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let colour = COLOURS[k % COLOURS.len()];
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#,
                sx(x),
                sy(y)
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ReportTable {
        ReportTable {
            title: "t".into(),
            columns: vec!["n".into(), "a|b".into()],
            row_labels: vec!["3".into(), "inf".into()],
            values: vec![vec![1.23456789], vec![0.5]],
            decimals: 3,
        }
    }

    #[test]
    fn csv_and_markdown() {
        let t = table();
        let csv = render_report(&t, ReportFormat::Csv).unwrap();
        assert_eq!(csv, "n,a|b\n3,1.23457\ninf,0.500000\n");
        let md = render_report(&t, ReportFormat::Markdown).unwrap();
        assert!(md.contains("| n | a\\|b |"));
        assert!(md.contains("| 3 | 1.235 |"));
        let empty = ReportTable { values: vec![], row_labels: vec![], ..t };
        assert!(render_report(&empty, ReportFormat::Csv).is_err());
    }

    #[test]
    fn svg_plot() {
        let s = Series {
            name: "b".into(),
            points: vec![(3.0, 5.0), (100.0, 1.0), (5000.0, 0.1)],
        };
        let svg = render_log_x_plot("x", "n", &[s]).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("polyline") && svg.contains("1e3"));
        let bad = Series { name: "b".into(), points: vec![(0.0, 1.0)] };
        assert!(render_log_x_plot("x", "n", &[bad]).is_err());
    }
}
