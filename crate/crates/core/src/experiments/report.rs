//! CSV tables and log-log SVG plots. Output depends only on the inputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::corollary::CorollaryReport;
use super::rate::RateReport;
use super::structure::StructureReport;
use crate::analysis::{write_fit_csv, write_structure_csv};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentResults {
    Rate(RateReport),
    Corollary(CorollaryReport),
    Structure(StructureReport),
}

impl ExperimentResults {
    pub fn passed(&self) -> bool {
        match self {
            ExperimentResults::Rate(r) => r.passed(),
            ExperimentResults::Corollary(r) => r.passed(),
            ExperimentResults::Structure(r) => r.passed(),
        }
    }

    pub fn file_name(&self) -> &'static str {
        match self {
            ExperimentResults::Rate(_) => "rate_results.toml",
            ExperimentResults::Corollary(_) => "corollary_results.toml",
            ExperimentResults::Structure(_) => "structure_results.toml",
        }
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name());
        let text = toml::to_string(self).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(&path, text)?;
        Ok(path)
    }

    /// Every results file present in `dir`.
    pub fn load_dir(dir: &Path) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for name in ["rate_results.toml", "corollary_results.toml", "structure_results.toml"] {
            let path = dir.join(name);
            if path.exists() {
                let text = fs::read_to_string(&path)?;
                out.push(toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?);
            }
        }
        Ok(out)
    }
}

/// A series of `(x, y)` points with an optional fitted line `y = e^b x^m`
/// and an optional guide slope through the first point.
#[derive(Debug, Clone)]
pub struct LogLogPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    pub fit: Option<(f64, f64)>,
    pub guide_slope: Option<f64>,
}

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 56.0;

impl LogLogPlot {
    pub fn to_svg(&self) -> String {
        let pts: Vec<(f64, f64)> =
            self.points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.log10(), y.log10())).collect();
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(&self.title));
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">log10 {}</text>"#,
            W / 2.0,
            H - 12.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="14" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {})">log10 {}</text>"#,
            H / 2.0,
            H / 2.0,
            esc(&self.y_label)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * PAD,
            H - 2.0 * PAD
        );
        if pts.is_empty() {
            svg.push_str("</svg>\n");
            return svg;
        }
        let (mut x0, mut x1, mut y0, mut y1) = bounds(&pts);
        let mut lines = Vec::new();
        if let Some((m, b)) = self.fit {
            let b10 = b / std::f64::consts::LN_10;
            lines.push(((x0, m * x0 + b10), (x1, m * x1 + b10), "#1f77b4", ""));
        }
        if let Some(m) = self.guide_slope {
            let (px, py) = pts[0];
            lines.push(((x0, py + m * (x0 - px)), (x1, py + m * (x1 - px)), "#888888", r#" stroke-dasharray="6 4""#));
        }
        for ((_, a), (_, b), _, _) in &lines {
            y0 = y0.min(*a).min(*b);
            y1 = y1.max(*a).max(*b);
        }
        if x1 - x0 < 1e-12 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-12 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
        for (label, x, anchor) in [(x0, sx(x0), "start"), (x1, sx(x1), "end")] {
            let _ = writeln!(
                svg,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="{anchor}" font-size="10">{label:.3}</text>"#,
                H - PAD + 14.0
            );
        }
        for (label, y) in [(y0, sy(y0)), (y1, sy(y1))] {
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{y:.2}" text-anchor="end" font-size="10">{label:.3}</text>"#,
                PAD - 4.0
            );
        }
        for ((ax, ay), (bx, by), color, extra) in &lines {
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}"{extra}/>"#,
                sx(*ax),
                sy(*ay),
                sx(*bx),
                sy(*by)
            );
        }
        for (x, y) in &pts {
            let _ = writeln!(svg, r##"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="#d62728"/>"##, sx(*x), sy(*y));
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn bounds(pts: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY), |(a, b, c, d), (x, y)| {
        (a.min(*x), b.max(*x), c.min(*y), d.max(*y))
    })
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn write_file(dir: &Path, name: &str, body: &[u8], out: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, body)?;
    out.push(path);
    Ok(())
}

fn emit_rate(r: &RateReport, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut kinds: Vec<_> = r.results.iter().map(|x| x.kernel).collect();
    kinds.dedup();
    for kind in kinds {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["s_prime", "alpha", "error", "iota_hat", "iota_predicted", "residual"])?;
        for res in r.results.iter().filter(|x| x.kernel == kind) {
            for (a, e) in res.alphas.iter().zip(&res.errors) {
                wtr.write_record([
                    num(res.s_prime.value()),
                    num(*a),
                    num(*e),
                    opt(res.iota_hat),
                    num(res.iota_predicted),
                    opt(res.residual),
                ])?;
            }
            let plot = LogLogPlot {
                title: format!("{kind} s' = {}", res.s_prime.value()),
                x_label: "alpha".into(),
                y_label: "error".into(),
                points: res
                    .alphas
                    .iter()
                    .zip(&res.errors)
                    .zip(&res.included)
                    .filter(|(_, &i)| i)
                    .map(|((a, e), _)| (*a, *e))
                    .collect(),
                fit: res.iota_hat.zip(res.intercept),
                guide_slope: Some(res.iota_predicted),
            };
            write_file(dir, &format!("rate_{kind}_sprime_{}.svg", res.s_prime.value()), plot.to_svg().as_bytes(), out)?;
        }
        let body = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        write_file(dir, &format!("rate_{kind}.csv"), &body, out)?;
    }
    Ok(())
}

fn emit_corollary(r: &CorollaryReport, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["kernel", "alpha", "s_prime", "error", "driver", "ratio"])?;
    for row in &r.rows {
        wtr.write_record([
            row.kernel.to_string(),
            num(row.alpha),
            num(row.s_prime.value()),
            num(row.error),
            num(row.driver),
            num(row.ratio),
        ])?;
    }
    write_file(dir, "corollary.csv", &wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?, out)?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["kernel", "s_prime", "spread", "max_ratio", "driver_slope", "passed"])?;
    for g in &r.groups {
        wtr.write_record([
            g.kernel.to_string(),
            num(g.s_prime.value()),
            num(g.spread),
            num(g.max_ratio),
            opt(g.driver_slope),
            g.passed().to_string(),
        ])?;
        let plot = LogLogPlot {
            title: format!("{} driver, s' = {}", g.kernel, g.s_prime.value()),
            x_label: "alpha".into(),
            y_label: "driver".into(),
            points: r
                .rows
                .iter()
                .filter(|x| x.kernel == g.kernel && x.s_prime == g.s_prime)
                .map(|x| (x.alpha, x.driver))
                .collect(),
            fit: None,
            guide_slope: Some(2.0),
        };
        write_file(dir, &format!("corollary_{}_sprime_{}.svg", g.kernel, g.s_prime.value()), plot.to_svg().as_bytes(), out)?;
    }
    write_file(dir, "corollary_summary.csv", &wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?, out)?;
    Ok(())
}

fn emit_structure(r: &StructureReport, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut alphas: Vec<f64> = r.rows.iter().map(|x| x.alpha).collect();
    alphas.dedup();
    for a in &alphas {
        let samples: Vec<_> = r.rows.iter().filter(|x| x.alpha == *a).map(|x| x.sample.clone()).collect();
        let mut buf = Vec::new();
        write_structure_csv(&samples, &mut buf)?;
        write_file(dir, &format!("structure_alpha_{a}.csv"), &buf, out)?;
        if let Some(fit) = r.fits.iter().find(|f| f.alpha == *a).and_then(|f| f.fit) {
            let mut buf = Vec::new();
            write_fit_csv(&[fit], &mut buf)?;
            write_file(dir, &format!("fit_alpha_{a}.csv"), &buf, out)?;
            let plot = LogLogPlot {
                title: format!("structure function, alpha = {a}"),
                x_label: "|y|".into(),
                y_label: "s2".into(),
                points: r
                    .rows
                    .iter()
                    .filter(|x| x.alpha == *a && !x.excluded)
                    .map(|x| (x.sample.y_norm(), x.sample.s2))
                    .collect(),
                fit: Some((2.0 * fit.gamma_hat, fit.e_hat.ln())),
                guide_slope: Some(2.0),
            };
            write_file(dir, &format!("structure_alpha_{a}.svg"), plot.to_svg().as_bytes(), out)?;
        }
    }
    if let Some(j) = r.joint {
        let mut buf = Vec::new();
        write_fit_csv(&[j], &mut buf)?;
        write_file(dir, "fit_joint.csv", &buf, out)?;
    }
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["|y|", "sup_s2", "sup_ratio"])?;
    for s in &r.sup {
        wtr.write_record([num(s.y), num(s.sup_s2), num(s.sup_ratio)])?;
    }
    write_file(dir, "structure_sup.csv", &wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?, out)?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["alpha", "hminus1", "l2", "constant"])?;
    for s in &r.surrogate {
        wtr.write_record([num(s.alpha), num(s.hminus1), num(s.l2), num(s.constant)])?;
    }
    write_file(dir, "surrogate.csv", &wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?, out)?;
    Ok(())
}

/// Writes every table and plot into `out_dir` and returns the paths in order.
pub fn emit_report(results: &[ExperimentResults], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if results.is_empty() {
        return Err(Error::Empty("experiment results"));
    }
    fs::create_dir_all(out_dir)?;
    let mut out = Vec::new();
    for r in results {
        match r {
            ExperimentResults::Rate(x) => emit_rate(x, out_dir, &mut out)?,
            ExperimentResults::Corollary(x) => emit_corollary(x, out_dir, &mut out)?,
            ExperimentResults::Structure(x) => emit_structure(x, out_dir, &mut out)?,
        }
    }
    Ok(out)
}
