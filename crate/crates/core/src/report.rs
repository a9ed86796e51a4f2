//! Output files for a finished run: `points.csv`, `result.json`, `curve.svg`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::app::RunManifest;
use crate::error::{Error, Result};

pub const POINTS_FILE: &str = "points.csv";
pub const RESULT_FILE: &str = "result.json";
pub const PLOT_FILE: &str = "curve.svg";

pub const CSV_HEADER: &str = "replicate,n,risk_estimate,total_cost";

/// 17 significant digits, enough to recover every f64 exactly.
fn full(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn points_csv(manifest: &RunManifest) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for rep in &manifest.replicates {
        for p in &rep.points {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                rep.index,
                p.n,
                full(p.risk_estimate),
                full(p.total_cost)
            );
        }
    }
    out
}

pub fn result_json(manifest: &RunManifest) -> Result<String> {
    Ok(serde_json::to_string_pretty(manifest)?)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes the three report files into `out_dir`, creating it if needed.
pub fn emit_report(manifest: &RunManifest, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    Ok(vec![
        write(out_dir.join(POINTS_FILE), &points_csv(manifest))?,
        write(out_dir.join(RESULT_FILE), &result_json(manifest)?)?,
        write(out_dir.join(PLOT_FILE), &render_svg(manifest))?,
    ])
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

/// Round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 7.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(t);
        t += step;
    }
    out
}

fn label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Scatter of total-cost estimates with each replicate's fitted curve and a
/// marker at its optimal size.
pub fn render_svg(manifest: &RunManifest) -> String {
    let c = manifest.config.experiment.unit_cost;
    let all_points = manifest.replicates.iter().flat_map(|r| r.points.iter());
    let n_max_points = all_points.clone().map(|p| p.n).max().unwrap_or(1) as f64;
    let n_max_opt = manifest
        .replicates
        .iter()
        .filter_map(|r| r.result.optimal_n())
        .max()
        .unwrap_or(0) as f64;
    let x_hi = (n_max_points.max(n_max_opt) * 1.05).max(2.0);
    let x_lo = 0.0;

    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for p in all_points {
        y_lo = y_lo.min(p.total_cost);
        y_hi = y_hi.max(p.total_cost);
    }
    for r in &manifest.replicates {
        if let Some(n) = r.result.optimal_n() {
            let v = r.result.curve.total_cost(n as f64);
            y_lo = y_lo.min(v);
            y_hi = y_hi.max(v);
        }
    }
    if !y_lo.is_finite() || !y_hi.is_finite() {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    let pad = 0.08 * (y_hi - y_lo).max(1e-12);
    let (y_lo, y_hi) = ((y_lo - pad).max(0.0), y_hi + pad);

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |n: f64| LEFT + (n - x_lo) / (x_hi - x_lo) * pw;
    let sy = |v: f64| TOP + (1.0 - (v - y_lo) / (y_hi - y_lo)) * ph;

    let e = &manifest.config.experiment;
    let loss_desc = match e.loss {
        crate::loss::LossSpec::IntervalQuantile { rho } => format!("L3, rho = {rho}"),
        crate::loss::LossSpec::IntervalCentered { gamma } => format!("L4, gamma = {gamma}"),
        other => other.label().to_string(),
    };
    let title = format!(
        "{loss_desc}, a1 = {}, b1 = {}, c = {c}",
        e.prior.beta.shape(),
        e.prior.beta.scale()
    );

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot-area"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath></defs>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="15">{title}</text>"#,
        WIDTH / 2.0
    );

    // axes
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black" fill="none"><line x1="{LEFT}" y1="{0}" x2="{1}" y2="{0}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{0}"/></g>"#,
        TOP + ph,
        LEFT + pw
    );
    for t in ticks(x_lo, x_hi) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{0}" x2="{x:.2}" y2="{1}" stroke="black"/><text x="{x:.2}" y="{2}" text-anchor="middle">{3}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0,
            label(t)
        );
    }
    for t in ticks(y_lo, y_hi) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r##"<line x1="{0}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><line x1="{LEFT}" y1="{y:.2}" x2="{1}" y2="{y:.2}" stroke="#e5e5e5"/><text x="{2}" y="{3:.2}" text-anchor="end">{4}</text>"##,
            LEFT - 5.0,
            LEFT + pw,
            LEFT - 8.0,
            y + 4.0,
            label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">sample size n</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">total cost</text>"#,
        TOP + ph / 2.0
    );

    let _ = writeln!(s, r#"<g clip-path="url(#plot-area)">"#);
    for (i, rep) in manifest.replicates.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for p in &rep.points {
            let _ = writeln!(
                s,
                r#"<circle class="point" data-replicate="{}" cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}" fill-opacity="0.45"/>"#,
                rep.index,
                sx(p.n as f64),
                sy(p.total_cost)
            );
        }
        let curve = &rep.result.curve;
        let start = rep.points.iter().map(|p| p.n).min().unwrap_or(1) as f64;
        let steps = 240;
        let path: Vec<String> = (0..=steps)
            .map(|k| {
                let n = start + (x_hi - start) * k as f64 / steps as f64;
                format!("{:.2},{:.2}", sx(n), sy(curve.total_cost(n)))
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="fit-curve" data-replicate="{}" fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"#,
            rep.index,
            path.join(" ")
        );
    }
    let _ = writeln!(s, "</g>");

    for (i, rep) in manifest.replicates.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if let Some(n) = rep.result.optimal_n() {
            let (x, y) = (sx(n as f64), sy(rep.result.curve.total_cost(n as f64)));
            let _ = writeln!(
                s,
                r#"<g class="optimum" data-replicate="{}"><line x1="{x:.2}" y1="{y:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="4 3"/><circle cx="{x:.2}" cy="{y:.2}" r="5" fill="none" stroke="{color}" stroke-width="2"/></g>"#,
                rep.index,
                TOP + ph
            );
        }
        let status = match rep.result.optimal_n() {
            Some(n) => format!("n_o = {n}"),
            None => "not worth sampling".to_string(),
        };
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let lx = LEFT + pw - 210.0;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{lx}" y1="{0}" x2="{1}" y2="{0}" stroke="{color}" stroke-width="2"/><text x="{2}" y="{3}">replicate {4}: {status} (R2 = {5:.3})</text></g>"#,
            ly,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            rep.index,
            rep.result.curve.r_squared
        );
    }
    s.push_str("</svg>\n");
    s
}
