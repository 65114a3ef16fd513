//! `plot`: SVG overlays of stored runs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use muskat_core::curve::{min_slope, Curve};

use crate::output::write_atomic;
use crate::simulate::{snapshot_files, TELEMETRY};
use crate::snapshot::{fmt17, SnapshotFile, SnapshotState};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 50.0); // left, right, top, bottom
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub dashed: bool,
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-2..1e4).contains(&a) {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A line chart; `log_y` plots `log10 y` with the labels in `y`.
pub fn chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series], log_y: bool) -> String {
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let pts = || series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && ty(p.1).is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(ty(y));
        y1 = y1.max(ty(y));
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 <= 0.0 {
        let pad = if y0 == 0.0 { 1.0 } else { 0.1 * y0.abs() };
        y0 -= pad;
        y1 += pad;
    }
    let pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    let (ml, mr, mt, mb) = MARGIN;
    let pw = WIDTH - ml - mr;
    let ph = HEIGHT - mt - mb;
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| mt + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<title>{}</title>"#, escape(title)).unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
    writeln!(s, r#"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
    for i in 0..=5 {
        let fx = x0 + (x1 - x0) * i as f64 / 5.0;
        let fy = y0 + (y1 - y0) * i as f64 / 5.0;
        let ylab = if log_y { tick_label(10f64.powf(fy)) } else { tick_label(fy) };
        writeln!(s, r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/>"#, sx(fx), mt + ph, mt + ph + 5.0).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, sx(fx), mt + ph + 18.0, tick_label(fx)).unwrap();
        writeln!(s, r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="black"/>"#, ml - 5.0, sy(fy), ml).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, ml - 8.0, sy(fy) + 4.0, ylab).unwrap();
    }
    if !log_y && y0 < 0.0 && y1 > 0.0 {
        writeln!(s, r##"<line x1="{ml}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="#888" stroke-dasharray="2,3"/>"##, sy(0.0), ml + pw).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, ml + pw / 2.0, HEIGHT - 10.0, escape(xlabel)).unwrap();
    writeln!(s, r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#, mt + ph / 2.0, escape(ylabel)).unwrap();
    for (k, ser) in series.iter().enumerate() {
        let path: Vec<String> = ser
            .points
            .iter()
            .filter(|p| p.0.is_finite() && ty(p.1).is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(ty(y))))
            .collect();
        let dash = if ser.dashed { r#" stroke-dasharray="6,3""# } else { "" };
        writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1.2"{dash} points="{}"/>"#, ser.color, path.join(" ")).unwrap();
        let ly = mt + 14.0 + 15.0 * k as f64;
        writeln!(s, r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{3}"{dash}/>"#, ml + pw - 150.0, ly - 4.0, ml + pw - 130.0, ser.color).unwrap();
        writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, ml + pw - 125.0, escape(&ser.label)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Tab-separated series data written next to a chart.
fn series_table(series: &[Series]) -> String {
    let mut s = String::from("# series x y\n");
    for ser in series {
        for (x, y) in &ser.points {
            writeln!(s, "{}\t{}\t{}", ser.label.replace(char::is_whitespace, "_"), fmt17(*x), fmt17(*y)).unwrap();
        }
    }
    s
}

fn interfaces(files: &[SnapshotFile]) -> Result<Vec<Series>> {
    let mut out = Vec::new();
    for (i, f) in files.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let label = |name: &str| format!("{name}t = {:.4e}", f.t);
        match f.problem.as_str() {
            "contour" | "galerkin" => {
                let pts = f.columns[1].iter().zip(&f.columns[2]).map(|(&a, &b)| (a, b)).collect();
                out.push(Series { label: label(""), points: pts, color, dashed: false });
            }
            _ => {
                for (c, name) in f.columns.iter().skip(1).zip(["f, ", "g, "]) {
                    let pts = f.abscissae().iter().zip(c).map(|(&a, &b)| (a, b)).collect();
                    let name = if f.columns.len() == 3 { name } else { "" };
                    out.push(Series { label: label(name), points: pts, color, dashed: name == "g, " });
                }
            }
        }
    }
    Ok(out)
}

struct Telemetry {
    dt: Vec<(f64, f64)>,
    min_slope: Vec<(f64, f64)>,
}

fn read_telemetry(path: &Path) -> Result<Telemetry> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut t = Telemetry { dt: Vec::new(), min_slope: Vec::new() };
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.starts_with('#')) {
        let cols: Vec<&str> = line.split_whitespace().collect();
        ensure!(cols.len() == 9, "{} line {}: expected 9 columns", path.display(), i + 1);
        let num = |k: usize| cols[k].parse::<f64>().with_context(|| format!("{} line {}: bad number", path.display(), i + 1));
        if cols[3] != "1" {
            continue;
        }
        let (time, dt) = (num(0)?, num(1)?);
        // the record carries the step's start; the state it observed is at its end
        t.dt.push((time, dt));
        if cols[5] != "-" {
            t.min_slope.push((time + dt, num(5)?));
        }
    }
    Ok(t)
}

pub struct Plotted {
    pub files: Vec<PathBuf>,
}

pub fn plot(inputs: &[PathBuf], out: &Path) -> Result<Plotted> {
    let mut files = Vec::new();
    let mut telemetry = None;
    for p in inputs {
        if p.is_dir() {
            files.extend(snapshot_files(p)?);
            if telemetry.is_none() && p.join(TELEMETRY).is_file() {
                telemetry = Some(p.join(TELEMETRY));
            }
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        bail!("no snapshot files to plot");
    }
    let snaps = files.iter().map(|p| SnapshotFile::read(p)).collect::<Result<Vec<_>>>()?;
    let problem = snaps[0].problem.clone();
    ensure!(snaps.iter().all(|s| s.problem == problem), "snapshots mix problems");
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut written = Vec::new();
    let mut emit = |name: &str, svg: String, series: &[Series]| -> Result<()> {
        let p = out.join(format!("{name}.svg"));
        write_atomic(&p, svg.as_bytes())?;
        write_atomic(&out.join(format!("{name}.tsv")), series_table(series).as_bytes())?;
        written.push(p);
        Ok(())
    };

    let contour = matches!(problem.as_str(), "contour" | "galerkin");
    let (xl, yl) = if contour { ("z1", "z2") } else if problem == "real-line" { ("x", "height") } else { ("alpha", "height") };
    let ser = interfaces(&snaps)?;
    emit("interfaces", chart(&format!("{problem} interfaces"), xl, yl, &ser, false), &ser)?;

    let tel = telemetry.as_deref().map(read_telemetry).transpose()?;
    let mut slope = tel.as_ref().map(|t| t.min_slope.clone()).unwrap_or_default();
    if contour && slope.is_empty() {
        for s in &snaps {
            let c = Curve::from_snapshot(s, None)?;
            slope.push((s.t, min_slope(&c)?.0));
        }
    }
    if !slope.is_empty() {
        let ser = [Series { label: "min d(alpha) z1".into(), points: slope, color: PALETTE[0], dashed: false }];
        emit("min-slope", chart("minimum slope of z1", "t", "min d(alpha) z1", &ser, false), &ser)?;
    }
    if let Some(t) = tel.filter(|t| !t.dt.is_empty()) {
        let ser = [Series { label: "accepted dt".into(), points: t.dt, color: PALETTE[1], dashed: false }];
        emit("dt", chart("time step", "t", "dt", &ser, true), &ser)?;
    }
    Ok(Plotted { files: written })
}
