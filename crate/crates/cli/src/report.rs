//! Figures built from scan artifacts already present in a results directory.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::commands::Outcome;
use crate::error::{io_at, param, CliError, CliResult};
use crate::format::{csv_document, fmt_real, json_document, parse_complex, Provenance};
use crate::svg::{Plot, Series, Style};

#[derive(Deserialize)]
struct DeltaFile {
    delta: f64,
}

#[derive(Deserialize)]
struct ZeroEntry {
    re: f64,
    im: f64,
    multiplicity: u32,
}

#[derive(Deserialize)]
struct ResonanceFile {
    zeros: Vec<ZeroEntry>,
}

/// Data rows of one of our CSV files, skipping the provenance and header lines.
fn csv_rows(text: &str) -> Vec<Vec<&str>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').collect()).collect()
}

fn num(field: &str) -> CliResult<f64> {
    field.parse().map_err(|_| param(format!("bad number '{field}' in scan artifact")))
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(io_at(path))
}

/// `(t, log|Z|)` points of a growth CSV.
fn growth_points(text: &str) -> CliResult<Vec<(f64, f64)>> {
    let mut pts = Vec::new();
    for row in csv_rows(text) {
        if row.len() < 4 || row[2] == "nan" {
            continue;
        }
        let z = parse_complex(row[2])?;
        pts.push((num(row[0])?, z.norm().ln()));
    }
    Ok(pts)
}

/// Window maxima over `[t_min 2^k, t_min 2^{k+1})`.
fn window_maxima(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let Some(&(t0, _)) = pts.first() else { return Vec::new() };
    let mut out: Vec<(usize, (f64, f64))> = Vec::new();
    for &(t, v) in pts {
        let k = (t / t0).log2().floor() as usize;
        match out.last_mut() {
            Some((kk, best)) if *kk == k => {
                if v > best.1 {
                    *best = (t, v);
                }
            }
            _ => out.push((k, (t, v))),
        }
    }
    out.into_iter().map(|(_, p)| p).collect()
}

fn growth_plot(stem: &str, pts: &[(f64, f64)], delta: f64) -> String {
    let maxima = window_maxima(pts);
    // Envelope shapes by their power of ln t.
    let shapes = [("C t^δ", 0.0), ("C t^δ (log t)^(2-δ)", 2.0 - delta)];
    let shape = |t: f64, k: f64| t.powf(delta) * t.ln().powf(k);
    let mut plot = Plot::new(&format!("{stem}: log|Z| envelope"), "t", "log|Z(σ+it)|")
        .log_x()
        .with(Series::new("log|Z|", pts.to_vec(), Style::Line))
        .with(Series::new("window maxima", maxima.clone(), Style::Markers));
    for (label, k) in shapes {
        let c = maxima.iter().filter(|(t, _)| *t > 1.0).map(|(t, v)| v / shape(*t, k)).fold(f64::NEG_INFINITY, f64::max);
        if c.is_finite() && c > 0.0 {
            let curve = pts.iter().map(|(t, _)| (*t, c * shape(*t, k))).collect();
            plot = plot.with(Series::new(label, curve, Style::Dashed));
        }
    }
    plot.render()
}

/// Line through the last point with the given log-log slope.
fn slope_guide(pts: &[(f64, f64)], slope: f64) -> Vec<(f64, f64)> {
    let Some(&(x1, y1)) = pts.iter().rev().find(|(x, y)| *x > 0.0 && *y > 0.0) else { return Vec::new() };
    pts.iter().filter(|(x, _)| *x > 0.0).map(|(x, _)| (*x, y1 * (x / x1).powf(slope))).collect()
}

fn sorted_names(dir: &Path) -> CliResult<Vec<String>> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map_err(io_at(dir))?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    names.sort();
    Ok(names)
}

#[derive(Serialize)]
struct Index {
    delta: f64,
    figures: Vec<String>,
    tables: Vec<String>,
}

/// Reads `delta.json` and every scan artifact in `dir`; returns the figures and tables to write.
pub fn emit_report(dir: &Path) -> CliResult<Outcome> {
    let delta_path = dir.join("delta.json");
    if !delta_path.exists() {
        return Err(CliError::MissingInput(delta_path));
    }
    let delta: DeltaFile =
        serde_json::from_str(&read(&delta_path)?).map_err(|e| param(format!("delta.json: {e}")))?;
    let delta = delta.delta;
    let mut files: Vec<(String, String)> = Vec::new();
    let mut tables = Vec::new();
    for name in sorted_names(dir)? {
        let path = dir.join(&name);
        if let Some(stem) = name.strip_prefix("growth_").and_then(|n| n.strip_suffix(".csv")) {
            let pts = growth_points(&read(&path)?)?;
            files.push((format!("growth_{stem}.svg"), growth_plot(&format!("growth {stem}"), &pts, delta)));
            tables.push(name.clone());
        } else if let Some(stem) = name.strip_prefix("resonances_").and_then(|n| n.strip_suffix(".json")) {
            let res: ResonanceFile =
                serde_json::from_str(&read(&path)?).map_err(|e| param(format!("{name}: {e}")))?;
            let pts: Vec<(f64, f64)> = res.zeros.iter().map(|z| (z.re, z.im)).collect();
            let plot = Plot::new(&format!("resonances {stem}"), "Re s", "Im s")
                .with(Series::new("zeros", pts, Style::Markers))
                .render();
            let prov = Provenance::new("report").with("source", &name);
            let rows = res.zeros.iter().map(|z| vec![fmt_real(z.re), fmt_real(z.im), z.multiplicity.to_string()]);
            files.push((format!("resonances_{stem}.svg"), plot));
            files.push((format!("resonances_{stem}.csv"), csv_document(&prov, &["re", "im", "multiplicity"], rows)));
        } else if let Some(stem) = name.strip_prefix("weyl_").and_then(|n| n.strip_suffix(".csv")) {
            let text = read(&path)?;
            let pts: Vec<(f64, f64)> = csv_rows(&text)
                .iter()
                .map(|r| Ok((num(r[0])?, num(r[1])?)))
                .collect::<CliResult<_>>()?;
            let positive: Vec<(f64, f64)> = pts.iter().copied().filter(|(_, n)| *n > 0.0).collect();
            let plot = Plot::new(&format!("N(σ,T) {stem}"), "T", "N(σ,T)")
                .log_log()
                .with(Series::new("N(σ,T)", positive.clone(), Style::Markers))
                .with(Series::new(format!("slope 1+δ = {:.4}", 1.0 + delta), slope_guide(&positive, 1.0 + delta), Style::Dashed))
                .render();
            files.push((format!("weyl_{stem}.svg"), plot));
            tables.push(name.clone());
        } else if let Some(stem) = name.strip_prefix("volume_").and_then(|n| n.strip_suffix(".csv")) {
            let text = read(&path)?;
            let pts: Vec<(f64, f64)> = csv_rows(&text)
                .iter()
                .map(|r| Ok((num(r[0])?, num(r[1])?)))
                .collect::<CliResult<_>>()?;
            let plot = Plot::new(&format!("vol Ω(h) {stem}"), "h", "area")
                .log_log()
                .with(Series::new("vol Ω(h)", pts.clone(), Style::Markers))
                .with(Series::new(format!("slope 2-δ = {:.4}", 2.0 - delta), slope_guide(&pts, 2.0 - delta), Style::Dashed))
                .render();
            files.push((format!("volume_{stem}.svg"), plot));
            tables.push(name.clone());
        }
    }
    let mut figures: Vec<String> = files.iter().map(|(n, _)| n.clone()).filter(|n| n.ends_with(".svg")).collect();
    figures.sort();
    tables.extend(files.iter().map(|(n, _)| n.clone()).filter(|n| n.ends_with(".csv")));
    tables.sort();
    let prov = Provenance::new("report").with("delta", delta);
    let summary = format!("{} figures from {}\n", figures.len(), dir.display());
    files.push(("report.json".into(), json_document(&prov, Index { delta, figures, tables })));
    Ok(Outcome { stdout: summary, files, passed: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_maxima_are_dyadic() {
        let pts = [(10.0, 1.0), (15.0, 3.0), (19.9, 2.0), (20.0, 0.5), (39.0, 4.0), (41.0, 1.0)];
        assert_eq!(window_maxima(&pts), vec![(15.0, 3.0), (39.0, 4.0), (41.0, 1.0)]);
    }

    #[test]
    fn guide_passes_through_last_point() {
        let g = slope_guide(&[(1.0, 2.0), (10.0, 5.0), (100.0, 0.0)], 2.0);
        let expected = [(1.0, 0.05), (10.0, 5.0), (100.0, 500.0)];
        assert_eq!(g.len(), expected.len());
        for ((x, y), (ex, ey)) in g.iter().zip(expected) {
            assert_eq!(*x, ex);
            assert!((y - ey).abs() <= 1e-12 * ey);
        }
    }

    #[test]
    fn missing_delta_is_a_parameter_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = emit_report(dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
