//! Tabular CSV output and small self-contained SVG plots.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::Result;

/// A named table of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// Appends a row of numbers; shortest round-trip formatting.
    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| num(*v)).collect());
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.headers)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }
}

/// Number formatting shared by CSV cells: `inf`, `-inf`, `nan` for
/// non-finite values.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn finite_range(vals: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        return None;
    }
    if lo == hi {
        Some((lo - 0.5, hi + 0.5))
    } else {
        Some((lo, hi))
    }
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = write!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    s
}

fn axes(s: &mut String, x: (f64, f64), y: (f64, f64), x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (PAD, W - PAD / 2.0, H - PAD, PAD / 2.0 + 10.0);
    let _ = write!(
        s,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" stroke="black" fill="none"/>"#
    );
    let _ = write!(s, r#"<text x="{x0}" y="{}" text-anchor="middle">{:.3}</text>"#, y0 + 16.0, x.0);
    let _ = write!(s, r#"<text x="{x1}" y="{}" text-anchor="middle">{:.3}</text>"#, y0 + 16.0, x.1);
    let _ = write!(s, r#"<text x="{}" y="{y0}" text-anchor="end">{:.3}</text>"#, x0 - 4.0, y.0);
    let _ = write!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.3}</text>"#, x0 - 4.0, y1 + 4.0, y.1);
    let _ = write!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = write!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

/// Line plot of several series; non-finite points break the line.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut s = header(title);
    let xr = finite_range(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)));
    let yr = finite_range(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)));
    let (Some(xr), Some(yr)) = (xr, yr) else {
        s.push_str("</svg>\n");
        return s;
    };
    axes(&mut s, xr, yr, x_label, y_label);
    let px = |x: f64| PAD + (x - xr.0) / (xr.1 - xr.0) * (W - 1.5 * PAD);
    let py = |y: f64| H - PAD - (y - yr.0) / (yr.1 - yr.0) * (H - 1.5 * PAD - 10.0);
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for &(x, y) in pts {
            if x.is_finite() && y.is_finite() {
                let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, px(x), py(y));
                pen_down = true;
            } else {
                pen_down = false;
            }
        }
        let _ = write!(s, r#"<path d="{}" stroke="{color}" fill="none" stroke-width="1.5"/>"#, d.trim_end());
        let _ = write!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            PAD + 10.0,
            PAD / 2.0 + 24.0 + 14.0 * k as f64,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Heat map of `log10` magnitudes on a row-major `rows × cols` array,
/// max-pooled down to at most `max_cells` per side.
pub fn heatmap(
    title: &str,
    values: &[f64],
    rows: usize,
    cols: usize,
    x_range: (f64, f64),
    y_range: (f64, f64),
    max_cells: usize,
) -> String {
    let mut s = header(title);
    if rows == 0 || cols == 0 || values.len() != rows * cols {
        s.push_str("</svg>\n");
        return s;
    }
    let fr = rows.div_ceil(max_cells.max(1));
    let fc = cols.div_ceil(max_cells.max(1));
    let (pr, pc) = (rows.div_ceil(fr), cols.div_ceil(fc));
    let mut pooled = vec![f64::NEG_INFINITY; pr * pc];
    for r in 0..rows {
        for c in 0..cols {
            let v = values[r * cols + c];
            let l = if v > 0.0 { v.log10() } else { f64::NEG_INFINITY };
            let slot = &mut pooled[(r / fr) * pc + c / fc];
            *slot = slot.max(l);
        }
    }
    let top = pooled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bottom = top - 16.0;
    axes(&mut s, x_range, y_range, "xi", "x");
    let (w, h) = (W - 1.5 * PAD, H - 1.5 * PAD - 10.0);
    let (cw, ch) = (w / pc as f64, h / pr as f64);
    for r in 0..pr {
        for c in 0..pc {
            let v = pooled[r * pc + c];
            let t = if top.is_finite() && v.is_finite() {
                ((v - bottom) / (top - bottom)).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let shade = (255.0 * (1.0 - t)).round() as u8;
            let _ = write!(
                s,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#{:02x}{:02x}ff"/>"##,
                PAD + c as f64 * cw,
                H - PAD - (r + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                shade,
                shade
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
