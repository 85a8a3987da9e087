//! Deterministic output writers: delimited tables, plain-text reports,
//! and a minimal SVG line plot.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Comma-separated table with a header row; every value printed with a
/// fixed 12-digit scientific format so reruns are byte-identical.
pub fn table(header: &[&str], columns: &[&[f64]]) -> String {
    let rows = columns.first().map_or(0, |c| c.len());
    debug_assert!(columns.iter().all(|c| c.len() == rows));
    let mut text = String::new();
    let _ = writeln!(text, "{}", header.join(","));
    for i in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| format!("{:.12e}", c[i])).collect();
        let _ = writeln!(text, "{}", line.join(","));
    }
    text
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

/// One plotted series: a connected line or scattered points.
pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub scatter: bool,
}

const PALETTE: [&str; 4] = ["#c23b22", "#2a6f97", "#3a7d44", "#7d5ba6"];

/// Minimal self-contained SVG plot of one or more series.
pub fn svg_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 520.0;
    const ML: f64 = 70.0;
    const MR: f64 = 20.0;
    const MT: f64 = 40.0;
    const MB: f64 = 50.0;

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for &v in s.x {
            x_min = x_min.min(v);
            x_max = x_max.max(v);
        }
        for &v in s.y {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    if !(x_min.is_finite() && x_max.is_finite()) {
        x_min = 0.0;
        x_max = 1.0;
    } else if x_min >= x_max {
        x_max = x_min + 1.0;
    }
    if !(y_min.is_finite() && y_max.is_finite()) {
        y_min = 0.0;
        y_max = 1.0;
    } else if y_min >= y_max {
        y_max = y_min + 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    let sx = |v: f64| ML + (v - x_min) / (x_max - x_min) * (W - ML - MR);
    let sy = |v: f64| H - MB - (v - y_min) / (y_max - y_min) * (H - MT - MB);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"13\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#333\"/>",
        W - ML - MR,
        H - MT - MB
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{title}</text>",
        0.5 * W
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_label}</text>",
        0.5 * W,
        H - 12.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">{y_label}</text>",
        0.5 * H,
        0.5 * H
    );
    // axis extents
    let _ = writeln!(
        svg,
        "<text x=\"{ML}\" y=\"{:.2}\" text-anchor=\"middle\">{x_min:.6}</text>",
        H - MB + 18.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_max:.6}</text>",
        W - MR,
        H - MB + 18.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{y_min:.4}</text>",
        ML - 6.0,
        H - MB
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{y_max:.4}</text>",
        ML - 6.0,
        MT + 4.0
    );

    for (index, s) in series.iter().enumerate() {
        let color = PALETTE[index % PALETTE.len()];
        if s.scatter {
            for (&xv, &yv) in s.x.iter().zip(s.y.iter()) {
                let _ = writeln!(
                    svg,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.2\" fill=\"{color}\" fill-opacity=\"0.6\"/>",
                    sx(xv),
                    sy(yv)
                );
            }
        } else {
            let mut d = String::new();
            for (i, (&xv, &yv)) in s.x.iter().zip(s.y.iter()).enumerate() {
                let _ = write!(
                    d,
                    "{}{:.2} {:.2}",
                    if i == 0 { "M" } else { " L" },
                    sx(xv),
                    sy(yv)
                );
            }
            let _ = writeln!(
                svg,
                "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>"
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"{color}\">{}</text>",
            W - MR - 150.0,
            MT + 18.0 + 16.0 * index as f64,
            s.label
        );
    }
    let _ = writeln!(svg, "</svg>");
    svg
}
