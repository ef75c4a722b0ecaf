//! Experiment orchestration: runs a validated config on a bounded worker
//! pool and writes CSV, manifest JSON and an SVG plot.
//!
//! Artifact bytes are a pure function of the config and the software
//! version: replicas may execute in any order, but aggregation is a fold
//! ordered by replica index.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::estimators::{
    beta_grid, convergence_experiment, cutset_statistics, deviation_tail, estimate_nu,
    EstimateRecord, GENERIC_OFFSET,
};
use crate::functionals::{phi_to_infinity, TRUNCATION_STEPS};
use crate::geometry::polytope::{direction_set, wulff_crystal};
use crate::law::{percolation_threshold, validate_law};
use crate::lattice::CapacityField;

/// One CSV row; the schema is fixed across experiment kinds.
#[derive(Debug, Clone)]
pub struct Row {
    pub quantity: &'static str,
    pub n: i64,
    pub replica: u64,
    pub seed: u64,
    pub value: f64,
    pub normalized_value: f64,
}

pub const CSV_HEADER: &str = "quantity,n,replica,seed,value,normalized_value";

/// A point of the plotted series with its error bar.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesPoint {
    pub x: f64,
    pub label: String,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug)]
pub struct RunOutput {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub svg_path: PathBuf,
}

fn rows_from_samples(
    quantity: &'static str,
    n: i64,
    d: usize,
    master_seed: u64,
    samples: &[f64],
) -> Vec<Row> {
    let scale = (n as f64).powi(d as i32 - 1);
    samples
        .iter()
        .enumerate()
        .map(|(replica, &normalized)| Row {
            quantity,
            n,
            replica: replica as u64,
            seed: master_seed,
            value: normalized * scale,
            normalized_value: normalized,
        })
        .collect()
}

fn series_from_records(records: &[(i64, f64, f64)]) -> Vec<SeriesPoint> {
    records
        .iter()
        .map(|&(n, mean, std)| SeriesPoint {
            x: n as f64,
            label: n.to_string(),
            mean,
            std,
        })
        .collect()
}

fn execute(cfg: &ExperimentConfig) -> Result<(Vec<Row>, Vec<SeriesPoint>, serde_json::Value)> {
    let d = cfg.d;
    match cfg.kind {
        ExperimentKind::Nu => {
            let v = cfg.direction.expect("validated");
            let mut rows = Vec::new();
            let mut summary = Vec::new();
            let mut series = Vec::new();
            for &n in &cfg.n_schedule {
                let rec = estimate_nu(v, d, n, cfg.h, &cfg.law, cfg.replicas, cfg.master_seed)?;
                rows.extend(rows_from_samples("tau", n, d, cfg.master_seed, &rec.samples));
                series.push((n, rec.mean, rec.std));
                summary.push(record_summary(&rec));
            }
            Ok((
                rows,
                series_from_records(&series),
                json!({ "estimates": summary }),
            ))
        }
        ExperimentKind::Flow => {
            let body = cfg.body.as_ref().expect("validated").to_body(d);
            let mut rows = Vec::new();
            let mut series = Vec::new();
            let mut traces = Vec::new();
            for &n in &cfg.n_schedule {
                let results: Vec<(f64, f64, Vec<(f64, f64)>)> = (0..cfg.replicas)
                    .into_par_iter()
                    .map(|replica| {
                        let field = CapacityField::new(cfg.law.clone(), cfg.master_seed, replica);
                        let res = phi_to_infinity(&body, n, &field)?;
                        Ok((res.value, res.truncation_radius, res.trace))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let scale = (n as f64).powi(d as i32 - 1);
                let samples: Vec<f64> = results.iter().map(|r| r.0 / scale).collect();
                rows.extend(rows_from_samples(
                    "phi_infinity",
                    n,
                    d,
                    cfg.master_seed,
                    &samples,
                ));
                let mean = samples.iter().sum::<f64>() / samples.len() as f64;
                let std = sample_std(&samples, mean);
                series.push((n, mean, std));
                traces.push(json!({
                    "n": n,
                    "truncation_radii": results.iter().map(|r| r.1).collect::<Vec<_>>(),
                    "traces": results.iter().map(|r| &r.2).collect::<Vec<_>>(),
                }));
            }
            Ok((
                rows,
                series_from_records(&series),
                json!({ "stabilization": traces }),
            ))
        }
        ExperimentKind::Converge => {
            let body = cfg.body.as_ref().expect("validated").to_body(d);
            let table =
                convergence_experiment(&body, &cfg.law, &cfg.n_schedule, cfg.replicas, cfg.master_seed)?;
            let mut rows = Vec::new();
            let mut series = Vec::new();
            for row in &table.rows {
                rows.extend(rows_from_samples(
                    "phi_infinity",
                    row.n,
                    d,
                    cfg.master_seed,
                    &row.samples,
                ));
                series.push((row.n, row.mean, row.std));
            }
            let summary = serde_json::to_value(&table)?;
            Ok((rows, series_from_records(&series), json!({ "convergence": summary })))
        }
        ExperimentKind::Tail => {
            let body = cfg.body.as_ref().expect("validated").to_body(d);
            let eps = cfg.eps.expect("validated");
            let table = deviation_tail(
                &body,
                &cfg.law,
                &cfg.n_schedule,
                eps,
                cfg.replicas,
                cfg.master_seed,
            )?;
            let mut rows = Vec::new();
            let mut series = Vec::new();
            for row in &table.convergence.rows {
                rows.extend(rows_from_samples(
                    "phi_infinity",
                    row.n,
                    d,
                    cfg.master_seed,
                    &row.samples,
                ));
            }
            for row in &table.rows {
                series.push((row.n, row.frequency, 0.0));
            }
            let summary = serde_json::to_value(&table)?;
            Ok((rows, series_from_records(&series), json!({ "tail": summary })))
        }
        ExperimentKind::Cutset => {
            let body = cfg.body.as_ref().expect("validated").to_body(d);
            let eps = cfg.eps.unwrap_or(0.5);
            let mut rows = Vec::new();
            let mut series = Vec::new();
            let mut stats_per_n = Vec::new();
            for &n in &cfg.n_schedule {
                let stats = cutset_statistics(&body, &cfg.law, n, eps, cfg.replicas, cfg.master_seed)?;
                let scale = (n as f64).powi(d as i32 - 1);
                for r in &stats.per_replica {
                    rows.push(Row {
                        quantity: "cutset",
                        n,
                        replica: r.replica,
                        seed: cfg.master_seed,
                        value: r.capacity,
                        normalized_value: r.size as f64 / scale,
                    });
                }
                let sizes: Vec<f64> = stats
                    .per_replica
                    .iter()
                    .map(|r| r.size as f64 / scale)
                    .collect();
                let mean = sizes.iter().sum::<f64>() / sizes.len() as f64;
                series.push((n, mean, sample_std(&sizes, mean)));
                stats_per_n.push(serde_json::to_value(&stats)?);
            }
            Ok((
                rows,
                series_from_records(&series),
                json!({ "cutsets": stats_per_n }),
            ))
        }
        ExperimentKind::Wulff => {
            let n = *cfg.n_schedule.iter().max().expect("validated");
            let dirs = direction_set(d, cfg.directions);
            let mut rows = Vec::new();
            let mut estimates = Vec::new();
            let mut series = Vec::new();
            for (i, &v) in dirs.iter().enumerate() {
                let rec = estimate_nu(v, d, n, cfg.h, &cfg.law, cfg.replicas, cfg.master_seed)?;
                rows.extend(rows_from_samples("tau", n, d, cfg.master_seed, &rec.samples));
                series.push(SeriesPoint {
                    x: i as f64,
                    label: format!("v{i}"),
                    mean: rec.mean,
                    std: rec.std,
                });
                estimates.push(rec);
            }
            let support: Vec<f64> = estimates.iter().map(|e| e.mean.max(1e-9)).collect();
            let crystal = wulff_crystal(
                &|v| {
                    let mut best = f64::MAX;
                    let mut val = 1.0;
                    for (i, &u) in dirs.iter().enumerate() {
                        let gap = crate::geometry::vec::dist(u, v);
                        if gap < best {
                            best = gap;
                            val = support[i];
                        }
                    }
                    val
                },
                &dirs,
            )?;
            let summary = json!({
                "estimates": estimates.iter().map(record_summary).collect::<Vec<_>>(),
                "crystal_vertices": crystal.vertices,
                "crystal_surface_measure": crystal.surface_measure(),
            });
            Ok((rows, series, summary))
        }
    }
}

fn record_summary(rec: &EstimateRecord) -> serde_json::Value {
    json!({
        "direction": rec.direction,
        "n": rec.n,
        "h": rec.h,
        "replicas": rec.replicas,
        "mean": rec.mean,
        "std": rec.std,
        "stderr": rec.stderr,
    })
}

fn sample_std(samples: &[f64], mean: f64) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    (samples
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .sum::<f64>()
        / (samples.len() - 1) as f64)
        .sqrt()
}

fn render_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.quantity, r.n, r.replica, r.seed, r.value, r.normalized_value
        ));
    }
    out
}

fn render_svg(series: &[SeriesPoint], title: &str) -> String {
    let w = 640.0;
    let h = 480.0;
    let ml = 70.0;
    let mr = 20.0;
    let mt = 40.0;
    let mb = 50.0;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{title}</text>\n",
        w / 2.0
    ));
    if series.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let xs: Vec<f64> = (0..series.len()).map(|i| i as f64).collect();
    let y_lo = series
        .iter()
        .map(|p| p.mean - p.std)
        .fold(f64::MAX, f64::min);
    let y_hi = series
        .iter()
        .map(|p| p.mean + p.std)
        .fold(f64::MIN, f64::max);
    let span = (y_hi - y_lo).max(1e-9);
    let y_lo = y_lo - 0.1 * span;
    let y_hi = y_hi + 0.1 * span;
    let px = |i: usize| {
        ml + (w - ml - mr) * if xs.len() == 1 { 0.5 } else { xs[i] / (xs.len() - 1) as f64 }
    };
    let py = |y: f64| h - mb - (h - mt - mb) * (y - y_lo) / (y_hi - y_lo);
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb,
        w - mr,
        h - mb
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb
    ));
    let mut path = String::new();
    for (i, p) in series.iter().enumerate() {
        let (x, y) = (px(i), py(p.mean));
        path.push_str(&format!("{}{x},{y}", if i == 0 { "M" } else { " L" }));
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"gray\"/>\n",
            py(p.mean - p.std),
            py(p.mean + p.std)
        ));
        svg.push_str(&format!("<circle cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"steelblue\"/>\n"));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            h - mb + 18.0,
            p.label
        ));
    }
    svg.push_str(&format!(
        "<path d=\"{path}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n"
    ));
    for frac in [0.0, 0.5, 1.0] {
        let y = y_lo + frac * (y_hi - y_lo);
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">{y:.4}</text>\n",
            ml - 6.0,
            py(y) + 4.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Runs a validated config and writes `results.csv`, `manifest.json` and
/// `plot.svg` into `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path, workers: Option<usize>) -> Result<RunOutput> {
    fs::create_dir_all(out_dir)?;
    let report = validate_law(&cfg.law, cfg.d)?;
    let (rows, series, summary) = match workers {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Format(format!("worker pool: {e}")))?;
            pool.install(|| execute(cfg))?
        }
        None => execute(cfg)?,
    };
    let csv = render_csv(&rows);
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "kind": cfg.kind,
        "config": cfg,
        "law_validation": {
            "zero_atom": report.zero_atom,
            "pc": report.pc,
            "subcritical_zeros": report.subcritical_zeros,
            "exp_moment": report.exp_moment,
            "warnings": report.warnings,
        },
        "constants": {
            "percolation_threshold_d2": percolation_threshold(2),
            "percolation_threshold_d3": percolation_threshold(3),
            "generic_offset": GENERIC_OFFSET,
            "truncation_steps": TRUNCATION_STEPS,
            "beta_grid": beta_grid(cfg.d),
        },
        "csv_header": CSV_HEADER,
        "row_count": rows.len(),
        "series": series,
        "summary": summary,
    });
    let title = format!("{} ({})", cfg.kind, law_label(&cfg.law));
    let svg = render_svg(&series, &title);
    let csv_path = out_dir.join("results.csv");
    let manifest_path = out_dir.join("manifest.json");
    let svg_path = out_dir.join("plot.svg");
    fs::write(&csv_path, csv)?;
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    fs::write(&svg_path, svg)?;
    Ok(RunOutput {
        csv_path,
        manifest_path,
        svg_path,
    })
}

fn law_label(law: &crate::law::CapacityLaw) -> String {
    use crate::law::CapacityLaw::*;
    match law {
        Constant { c } => format!("constant {c}"),
        BernoulliScaled { p, value } => format!("bernoulli {p} x {value}"),
        Uniform { a, b } => format!("uniform [{a}, {b}]"),
        Exponential { rate } => format!("exponential {rate}"),
        FiniteDiscrete { atoms } => format!("discrete ({} atoms)", atoms.len()),
    }
}
