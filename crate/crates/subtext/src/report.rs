//! Evaluation rendering: fixed-width tables for stdout and serde mirrors
//! for machine-readable JSON reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use subtext_core::eval::{CvSummary, EvalReport};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("failed to write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to serialize report: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Serialize)]
pub struct JsonClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Serialize)]
pub struct JsonReport {
    pub labels: Vec<String>,
    pub confusion: Vec<Vec<u64>>,
    pub per_class: Vec<JsonClassMetrics>,
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub macro_f1: f64,
}

pub fn json_report(report: &EvalReport, labels: &[String]) -> JsonReport {
    JsonReport {
        labels: labels.to_vec(),
        confusion: report.confusion.clone(),
        per_class: report
            .per_class
            .iter()
            .zip(labels)
            .map(|(m, label)| JsonClassMetrics {
                label: label.clone(),
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
                support: m.support,
            })
            .collect(),
        accuracy: report.accuracy,
        weighted_f1: report.weighted_f1,
        macro_f1: report.macro_f1,
    }
}

#[derive(Serialize)]
pub struct JsonSplitStats {
    pub per_split: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Serialize)]
pub struct JsonCvReport {
    pub k: usize,
    pub seed: u64,
    pub splits: Vec<JsonReport>,
    pub weighted_f1: JsonSplitStats,
    pub macro_f1: JsonSplitStats,
}

pub fn json_cv_report(
    reports: &[EvalReport],
    summary: &CvSummary,
    labels: &[String],
    k: usize,
    seed: u64,
) -> JsonCvReport {
    JsonCvReport {
        k,
        seed,
        splits: reports.iter().map(|r| json_report(r, labels)).collect(),
        weighted_f1: JsonSplitStats {
            per_split: summary.weighted_f1s.clone(),
            mean: summary.weighted_mean,
            std: summary.weighted_std,
        },
        macro_f1: JsonSplitStats {
            per_split: summary.macro_f1s.clone(),
            mean: summary.macro_mean,
            std: summary.macro_std,
        },
    }
}

/// Serializes pretty JSON with a trailing newline. Output bytes are a pure
/// function of the value, so identical runs write identical files.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let mut json = serde_json::to_string_pretty(value)?;
    json.push('\n');
    fs::write(path, json).map_err(|e| ReportError::Write {
        path: path.display().to_string(),
        source: e,
    })
}

/// Human-readable single-evaluation table: per-class metrics, aggregate
/// scores, and the confusion matrix (rows gold, columns predicted).
pub fn render_report(report: &EvalReport, labels: &[String]) -> String {
    let name_width = labels
        .iter()
        .map(|l| l.len())
        .chain(std::iter::once("class".len()))
        .max()
        .unwrap_or(5);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<name_width$}  precision  recall      f1  support",
        "class"
    );
    for (label, m) in labels.iter().zip(&report.per_class) {
        let _ = writeln!(
            out,
            "{label:<name_width$}     {:.4}  {:.4}  {:.4}  {:>7}",
            m.precision, m.recall, m.f1, m.support
        );
    }
    out.push('\n');
    let _ = writeln!(out, "accuracy     {:.4}", report.accuracy);
    let _ = writeln!(out, "weighted F1  {:.4}", report.weighted_f1);
    let _ = writeln!(out, "macro F1     {:.4}", report.macro_f1);
    out.push('\n');

    let cell_width = report
        .confusion
        .iter()
        .flatten()
        .map(|n| n.to_string().len())
        .chain(labels.iter().map(|l| l.len()))
        .max()
        .unwrap_or(1);
    let _ = writeln!(out, "confusion (rows = gold, columns = predicted)");
    let mut header = format!("{:<name_width$}", "");
    for label in labels {
        let _ = write!(header, "  {label:>cell_width$}");
    }
    out.push_str(header.trim_end());
    out.push('\n');
    for (label, row) in labels.iter().zip(&report.confusion) {
        let _ = write!(out, "{label:<name_width$}");
        for count in row {
            let _ = write!(out, "  {count:>cell_width$}");
        }
        out.push('\n');
    }
    out
}

/// Human-readable cross-validation table with per-split scores, `*` on each
/// column's maximum, and mean ± population standard deviation.
pub fn render_cv_report(summary: &CvSummary) -> String {
    let best_weighted = summary
        .weighted_f1s
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let best_macro = summary
        .macro_f1s
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);

    let mut out = String::new();
    let _ = writeln!(out, "split  weighted F1  macro F1");
    for (i, (w, m)) in summary
        .weighted_f1s
        .iter()
        .zip(&summary.macro_f1s)
        .enumerate()
    {
        let w_mark = if *w == best_weighted { " *" } else { "  " };
        let m_mark = if *m == best_macro { " *" } else { "  " };
        let _ = writeln!(out, "{i:>5}     {w:.4}{w_mark}     {m:.4}{m_mark}");
    }
    out.push('\n');
    let _ = writeln!(
        out,
        "weighted F1  {:.4} ± {:.4}",
        summary.weighted_mean, summary.weighted_std
    );
    let _ = writeln!(
        out,
        "macro F1     {:.4} ± {:.4}",
        summary.macro_mean, summary.macro_std
    );
    out
}
