//! Tidy CSV and a dependency-free SVG renderer for regret curves.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::stats::Band;
use crate::error::{Error, Result};

pub const BAND_HEADER: &str = "series,t,mean,lower,upper,replications";

/// One labelled mean curve with its band; point `i` is at `t = i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub band: Band,
}

pub fn band_csv(series: &[Series]) -> String {
    let mut s = String::new();
    writeln!(s, "{BAND_HEADER}").unwrap();
    for c in series {
        let b = &c.band;
        for i in 0..b.mean.len() {
            writeln!(s, "{},{},{},{},{},{}", c.label, i + 1, b.mean[i], b.lower[i], b.upper[i], b.replications).unwrap();
        }
    }
    s
}

const PALETTE: [&str; 7] = ["#1b6ca8", "#d1495b", "#2e933c", "#edae49", "#6a4c93", "#00798c", "#444444"];
const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// Mean curves with shaded bands. Output depends only on the input.
pub fn band_svg(series: &[Series], title: &str) -> String {
    let len = series.iter().map(|c| c.band.mean.len()).max().unwrap_or(0);
    let mut lo = series
        .iter()
        .flat_map(|c| c.band.lower.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let mut hi = series
        .iter()
        .flat_map(|c| c.band.upper.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let xmax = len.max(2) as f64;
    let px = |t: f64| LEFT + (t - 1.0) / (xmax - 1.0) * plot_w;
    let py = |v: f64| TOP + (hi - v) / (hi - lo) * plot_h;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + plot_w / 2.0, escape(title)).unwrap();
    writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let y = py(v);
        writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 4.0).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, tick(v)).unwrap();
        let t = 1.0 + (xmax - 1.0) * i as f64 / 4.0;
        let x = px(t);
        let yb = TOP + plot_h;
        writeln!(s, r#"<line x1="{x:.2}" y1="{yb:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, yb + 4.0).unwrap();
        writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, yb + 18.0, tick(t)).unwrap();
    }
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#, LEFT + plot_w / 2.0, HEIGHT - 10.0).unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">cumulative regret</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    )
    .unwrap();

    for (k, c) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let b = &c.band;
        if b.mean.is_empty() {
            continue;
        }
        let mut poly = String::new();
        for (i, v) in b.upper.iter().enumerate() {
            write!(poly, "{:.2},{:.2} ", px(i as f64 + 1.0), py(*v)).unwrap();
        }
        for (i, v) in b.lower.iter().enumerate().rev() {
            write!(poly, "{:.2},{:.2} ", px(i as f64 + 1.0), py(*v)).unwrap();
        }
        writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, poly.trim_end()).unwrap();
        let mut line = String::new();
        for (i, v) in b.mean.iter().enumerate() {
            write!(line, "{:.2},{:.2} ", px(i as f64 + 1.0), py(*v)).unwrap();
        }
        writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, line.trim_end()).unwrap();
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 12.0;
        writeln!(s, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&c.label)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || v == v.trunc() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `<stem>.csv` and, if asked, `<stem>.svg` into `dir`.
pub fn emit_plot_data(series: &[Series], dir: &Path, stem: &str, svg: bool) -> Result<Vec<PathBuf>> {
    let csv_path = dir.join(format!("{stem}.csv"));
    write_file(&csv_path, &band_csv(series))?;
    let mut out = vec![csv_path];
    if svg {
        let svg_path = dir.join(format!("{stem}.svg"));
        write_file(&svg_path, &band_svg(series, stem))?;
        out.push(svg_path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series() -> Vec<Series> {
        vec![Series {
            label: "a".into(),
            band: Band {
                mean: vec![0.0, 1.5, 2.0],
                lower: vec![0.0, 1.0, 1.25],
                upper: vec![0.0, 2.0, 2.75],
                replications: 3,
            },
        }]
    }

    #[test]
    fn empty_input_gives_header_only() {
        assert_eq!(band_csv(&[]), format!("{BAND_HEADER}\n"));
        assert!(band_svg(&[], "x").ends_with("</svg>\n"));
    }

    #[test]
    fn svg_is_deterministic_and_escaped() {
        let mut s = series();
        s[0].label = "a<b".into();
        let one = band_svg(&s, "t & u");
        assert_eq!(one, band_svg(&s, "t & u"));
        assert!(one.contains("a&lt;b") && one.contains("t &amp; u"));
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("f");
        std::fs::write(&file, "x").unwrap();
        let err = emit_plot_data(&series(), &file.join("sub"), "s", false).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
