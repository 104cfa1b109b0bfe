//! Bit-exact table emission.
//!
//! CSV: header `omega_over_delta,re_K,im_K,abs_K,re_B,im_B`, one row per grid
//! point, every number printed with 17 significant digits so a double round
//! trips losslessly, LF line endings. JSON mirrors the run configuration plus
//! the same six columns and method metadata.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use driven_tls::spectrum::{MatchTable, PeakReport};
use driven_tls::ResponseSpectrum;
use serde::Serialize;

use crate::config::RunConfig;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits: 1 leading + 16 fractional.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(spec: &ResponseSpectrum, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut out = std::io::BufWriter::new(file);
    out.write_all(b"omega_over_delta,re_K,im_K,abs_K,re_B,im_B\n")?;
    for i in 0..spec.grid.len() {
        let k = spec.values[i];
        let b = spec.diagonal[i];
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt(spec.grid[i]),
            fmt(k.re),
            fmt(k.im),
            fmt(k.norm()),
            fmt(b.re),
            fmt(b.im)
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SpectrumColumns {
    omega_over_delta: Vec<f64>,
    re_k: Vec<f64>,
    im_k: Vec<f64>,
    abs_k: Vec<f64>,
    re_b: Vec<f64>,
    im_b: Vec<f64>,
}

#[derive(Serialize)]
struct SpectrumMetadata {
    depth: usize,
    n_gamma: usize,
    gamma: f64,
    method_tag: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct SpectrumDocument<'a> {
    config: &'a RunConfig,
    metadata: SpectrumMetadata,
    data: SpectrumColumns,
}

fn columns(spec: &ResponseSpectrum) -> SpectrumColumns {
    SpectrumColumns {
        omega_over_delta: spec.grid.clone(),
        re_k: spec.values.iter().map(|v| v.re).collect(),
        im_k: spec.values.iter().map(|v| v.im).collect(),
        abs_k: spec.values.iter().map(|v| v.norm()).collect(),
        re_b: spec.diagonal.iter().map(|v| v.re).collect(),
        im_b: spec.diagonal.iter().map(|v| v.im).collect(),
    }
}

pub fn write_json(spec: &ResponseSpectrum, config: &RunConfig, path: &Path) -> Result<()> {
    let doc = SpectrumDocument {
        config,
        metadata: SpectrumMetadata {
            depth: spec.depth,
            n_gamma: spec.n_gamma_terms,
            gamma: spec.gamma_used,
            method_tag: spec.method.as_str(),
            version: ARTIFACT_VERSION,
        },
        data: columns(spec),
    };
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &doc)?;
    Ok(())
}

pub fn write_spectrum(spec: &ResponseSpectrum, config: &RunConfig, path: &Path) -> Result<()> {
    match config.format {
        crate::config::OutputFormat::Csv => write_csv(spec, path),
        crate::config::OutputFormat::Json => write_json(spec, config, path),
    }
}

#[derive(Serialize)]
struct PeakRecord {
    omega_over_delta: f64,
    height: f64,
    prominence: f64,
}

#[derive(Serialize)]
struct ReportRecord {
    method_tag: &'static str,
    window: (f64, f64),
    peaks: Vec<PeakRecord>,
}

#[derive(Serialize)]
struct PairRecord {
    omega_a: f64,
    omega_b: f64,
    delta_omega: f64,
}

#[derive(Serialize)]
pub struct MatchDocument {
    config: RunConfig,
    tolerance: f64,
    /// the exit-status flag: every reported continued-fraction peak found a
    /// time-domain partner within tolerance
    success: bool,
    /// the generic dominance-rule flag of the match table
    dominant_report_matched: bool,
    reports: (ReportRecord, ReportRecord),
    matched: Vec<PairRecord>,
    unmatched_a: Vec<PeakRecord>,
    unmatched_b: Vec<PeakRecord>,
}

fn report_record(report: &PeakReport) -> ReportRecord {
    ReportRecord {
        method_tag: report.method_tag.as_str(),
        window: report.window,
        peaks: report
            .peaks
            .iter()
            .map(|p| PeakRecord {
                omega_over_delta: p.omega_over_delta,
                height: p.height,
                prominence: p.prominence,
            })
            .collect(),
    }
}

pub fn match_document(
    config: &RunConfig,
    a: &PeakReport,
    b: &PeakReport,
    table: &MatchTable,
    success: bool,
) -> MatchDocument {
    MatchDocument {
        config: config.clone(),
        tolerance: config.tolerance,
        success,
        dominant_report_matched: table.success,
        reports: (report_record(a), report_record(b)),
        matched: table
            .pairs
            .iter()
            .map(|p| PairRecord {
                omega_a: p.a.omega_over_delta,
                omega_b: p.b.omega_over_delta,
                delta_omega: p.delta_omega,
            })
            .collect(),
        unmatched_a: a
            .peaks
            .iter()
            .filter(|p| table.unmatched_a.iter().any(|q| q.omega_over_delta == p.omega_over_delta))
            .map(|p| PeakRecord {
                omega_over_delta: p.omega_over_delta,
                height: p.height,
                prominence: p.prominence,
            })
            .collect(),
        unmatched_b: b
            .peaks
            .iter()
            .filter(|p| table.unmatched_b.iter().any(|q| q.omega_over_delta == p.omega_over_delta))
            .map(|p| PeakRecord {
                omega_over_delta: p.omega_over_delta,
                height: p.height,
                prominence: p.prominence,
            })
            .collect(),
    }
}

pub fn write_pretty_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), value)?;
    Ok(())
}
