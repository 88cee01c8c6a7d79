//! Report rendering: a fixed-grid table, stable JSON, and CSV.

use std::fmt::Write;

use num_traits::Float;
use serde::Serialize;

use super::{EvalReport, Regime};

/// Output formats for [`render_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Regime x (P, R, F1)@N grid with values in percent.
    Table,
    /// Stable-key JSON of the full report (fractions in `[0, 1]`).
    Json,
    /// One `regime,n,precision,recall,f1` row per macro cell (fractions).
    Csv,
}

/// Render a report deterministically in the requested format.
pub fn render_report<F: Float + Serialize>(
    report: &EvalReport<F>,
    format: ReportFormat,
) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes"),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Table => render_table(report),
    }
}

fn render_csv<F: Float>(report: &EvalReport<F>) -> String {
    let mut out = String::from("regime,n,precision,recall,f1\n");
    for regime in Regime::ALL {
        for &n in &report.n_values {
            if let Some(prf) = report.macro_avg.get(regime, n) {
                let _ = writeln!(
                    out,
                    "{},{},{:.6},{:.6},{:.6}",
                    regime.name(),
                    n,
                    prf.precision.to_f64().unwrap_or(f64::NAN),
                    prf.recall.to_f64().unwrap_or(f64::NAN),
                    prf.f1.to_f64().unwrap_or(f64::NAN),
                );
            }
        }
    }
    out
}

fn render_table<F: Float>(report: &EvalReport<F>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "extractor: {}   documents: {}   (values in %)",
        report.extractor_name,
        report.per_document.len()
    );

    let _ = write!(out, "{:<10}", "regime");
    for &n in &report.n_values {
        let _ = write!(out, "| {:^22} ", format!("@{n}"));
    }
    out.push('\n');
    let _ = write!(out, "{:<10}", "");
    for _ in &report.n_values {
        let _ = write!(out, "| {:>6} {:>6} {:>6}  ", "P", "R", "F1");
    }
    out.push('\n');

    let width = 10 + report.n_values.len() * 25;
    let _ = writeln!(out, "{}", "-".repeat(width));

    for regime in Regime::ALL {
        let _ = write!(out, "{:<10}", regime.name());
        for &n in &report.n_values {
            match report.macro_avg.get(regime, n) {
                Some(prf) => {
                    let _ = write!(
                        out,
                        "| {:>6.2} {:>6.2} {:>6.2}  ",
                        prf.precision.to_f64().unwrap_or(f64::NAN) * 100.0,
                        prf.recall.to_f64().unwrap_or(f64::NAN) * 100.0,
                        prf.f1.to_f64().unwrap_or(f64::NAN) * 100.0,
                    );
                }
                None => {
                    let _ = write!(out, "| {:>6} {:>6} {:>6}  ", "-", "-", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}
