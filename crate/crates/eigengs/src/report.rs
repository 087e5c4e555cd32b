//! FitReport serialization and aggregation: CSV in a fixed column order,
//! summary statistics per sampled iteration, and a dependency-free SVG line
//! chart of the PSNR curve.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::train::{FitReport, FitRow};

pub const CSV_HEADER: &str = "iteration,loss,psnr_db,ssim,seconds";

pub fn write_csv(path: &Path, report: &FitReport) -> Result<()> {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{:.3}",
            row.iteration, row.loss, row.psnr_db, row.ssim, row.seconds
        )
        .expect("string write");
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<FitReport> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == CSV_HEADER => {}
        other => {
            return Err(Error::Usage(format!(
                "{}: expected header '{CSV_HEADER}', got {other:?}",
                path.display()
            )))
        }
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Usage(format!(
                "{}:{}: expected 5 fields, got {}",
                path.display(),
                lineno + 2,
                fields.len()
            )));
        }
        let parse_f = |s: &str| {
            s.trim().parse::<f64>().map_err(|e| {
                Error::Usage(format!("{}:{}: bad number '{s}': {e}", path.display(), lineno + 2))
            })
        };
        rows.push(FitRow {
            iteration: fields[0].trim().parse::<usize>().map_err(|e| {
                Error::Usage(format!("{}:{}: bad iteration: {e}", path.display(), lineno + 2))
            })?,
            loss: parse_f(fields[1])?,
            psnr_db: parse_f(fields[2])?,
            ssim: parse_f(fields[3])?,
            seconds: parse_f(fields[4])?,
        });
    }
    Ok(FitReport { rows })
}

/// Aggregate statistics over several reports at one sampled iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct AggRow {
    pub iteration: usize,
    pub count: usize,
    pub mean_psnr: f64,
    pub std_psnr: f64,
    pub mean_ssim: f64,
    pub std_ssim: f64,
    /// Percentage of reports whose PSNR exceeds the threshold here.
    pub pct_above: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Groups rows by iteration across reports. Standard deviations are
/// population-style (divide by n).
pub fn aggregate(reports: &[FitReport], threshold_db: f64) -> Vec<AggRow> {
    let mut groups: BTreeMap<usize, Vec<&FitRow>> = BTreeMap::new();
    for report in reports {
        for row in &report.rows {
            groups.entry(row.iteration).or_default().push(row);
        }
    }
    groups
        .into_iter()
        .map(|(iteration, rows)| {
            let psnr: Vec<f64> = rows.iter().map(|r| r.psnr_db).collect();
            let ssim: Vec<f64> = rows.iter().map(|r| r.ssim).collect();
            let (mean_psnr, std_psnr) = mean_std(&psnr);
            let (mean_ssim, std_ssim) = mean_std(&ssim);
            let above = psnr.iter().filter(|&&p| p > threshold_db).count();
            AggRow {
                iteration,
                count: rows.len(),
                mean_psnr,
                std_psnr,
                mean_ssim,
                std_ssim,
                pct_above: 100.0 * above as f64 / rows.len() as f64,
            }
        })
        .collect()
}

pub fn format_table(rows: &[AggRow], threshold_db: f64) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:>9} {:>5} {:>10} {:>9} {:>8} {:>8} {:>8}",
        "iteration", "n", "psnr_mean", "psnr_std", "ssim", "ssim_std",
        format!("%>{threshold_db}dB")
    )
    .unwrap();
    for r in rows {
        writeln!(
            out,
            "{:>9} {:>5} {:>10.2} {:>9.2} {:>8.4} {:>8.4} {:>8.1}",
            r.iteration, r.count, r.mean_psnr, r.std_psnr, r.mean_ssim, r.std_ssim, r.pct_above
        )
        .unwrap();
    }
    out
}

/// Renders the mean-PSNR curve as a standalone SVG document. Non-finite
/// samples (the identical-image sentinel) are skipped.
pub fn render_svg(rows: &[AggRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const ML: f64 = 56.0; // margins
    const MR: f64 = 16.0;
    const MT: f64 = 18.0;
    const MB: f64 = 44.0;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.mean_psnr.is_finite())
        .map(|r| (r.iteration as f64, r.mean_psnr))
        .collect();
    let (x_max, y_min, y_max) = if points.is_empty() {
        (1.0, 0.0, 1.0)
    } else {
        let x_max = points.iter().map(|p| p.0).fold(1.0f64, f64::max);
        let y_min = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let y_max = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let pad = ((y_max - y_min) * 0.08).max(0.5);
        (x_max, y_min - pad, y_max + pad)
    };
    let sx = |x: f64| ML + (x / x_max) * (W - ML - MR);
    let sy = |y: f64| H - MB - ((y - y_min) / (y_max - y_min)) * (H - MT - MB);

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    )
    .unwrap();
    writeln!(svg, "  <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>").unwrap();
    writeln!(
        svg,
        "  <line x1=\"{ML}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
        H - MB,
        W - MR,
        H - MB
    )
    .unwrap();
    writeln!(
        svg,
        "  <line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{:.1}\" stroke=\"black\"/>",
        H - MB
    )
    .unwrap();
    // Axis labels: five ticks each.
    for t in 0..=4 {
        let x = x_max * t as f64 / 4.0;
        writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{:.0}</text>",
            sx(x),
            H - MB + 16.0,
            x
        )
        .unwrap();
        let y = y_min + (y_max - y_min) * t as f64 / 4.0;
        writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{:.1}</text>",
            ML - 6.0,
            sy(y) + 4.0,
            y
        )
        .unwrap();
    }
    writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">iteration</text>",
        (ML + W - MR) / 2.0,
        H - 8.0
    )
    .unwrap();
    writeln!(
        svg,
        "  <text x=\"14\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1})\">PSNR (dB)</text>",
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    )
    .unwrap();
    if !points.is_empty() {
        let path: Vec<String> =
            points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        writeln!(
            svg,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\"/>",
            path.join(" ")
        )
        .unwrap();
        for &(x, y) in &points {
            writeln!(
                svg,
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.4\" fill=\"#1f6fb2\"/>",
                sx(x),
                sy(y)
            )
            .unwrap();
        }
    }
    svg.push_str("</svg>\n");
    svg
}
