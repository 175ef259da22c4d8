//! Classification metrics: confusion matrices, per-class precision / recall /
//! F1, the support-weighted and unweighted (macro) F1 aggregates, and
//! mean-and-spread summaries across cross-validation splits.
//!
//! Degenerate ratios use the 0/0 → 0 convention throughout, so tiny classes
//! that a fold never predicts produce zeros instead of NaNs.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("gold and predicted label counts differ ({gold} vs {pred})")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("cannot evaluate zero predictions")]
    EmptyInput,
    #[error("class id {id} out of range for {c} classes")]
    ClassOutOfRange { id: usize, c: usize },
    #[error("cannot summarize zero evaluation reports")]
    NoReports,
}

/// Precision, recall, F1 and gold support for one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Everything the evaluator derives from one (gold, predicted) pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Rows are gold classes, columns predicted classes.
    pub confusion: Vec<Vec<u64>>,
    pub per_class: Vec<ClassMetrics>,
    pub weighted_f1: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
}

/// `C × C` count matrix; entry `(i, j)` counts gold `i` predicted as `j`.
pub fn confusion_matrix(
    gold: &[usize],
    pred: &[usize],
    c: usize,
) -> Result<Vec<Vec<u64>>, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut confusion = vec![vec![0u64; c]; c];
    for (&g, &p) in gold.iter().zip(pred) {
        let id = g.max(p);
        if id >= c {
            return Err(EvalError::ClassOutOfRange { id, c });
        }
        confusion[g][p] += 1;
    }
    Ok(confusion)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class metrics from a confusion matrix: `P = TP/(TP+FP)`,
/// `R = TP/(TP+FN)`, `F1 = 2PR/(P+R)`, support = gold row sum.
pub fn per_class_metrics(confusion: &[Vec<u64>]) -> Vec<ClassMetrics> {
    let c = confusion.len();
    (0..c)
        .map(|i| {
            let tp = confusion[i][i];
            let row: u64 = confusion[i].iter().sum();
            let col: u64 = confusion.iter().map(|r| r[i]).sum();
            let precision = ratio(tp, col);
            let recall = ratio(tp, row);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                precision,
                recall,
                f1,
                support: row,
            }
        })
        .collect()
}

/// Support-weighted mean of per-class F1: `(1/N) Σ n_i·F_i`.
///
/// When every support is equal this reduces algebraically to the macro mean,
/// and it is computed through that reduction so the equality holds bit-exactly
/// (it also covers the all-zero-support case without dividing by zero).
pub fn weighted_f1(per_class: &[ClassMetrics]) -> f64 {
    if per_class.is_empty() {
        return 0.0;
    }
    if per_class.iter().all(|m| m.support == per_class[0].support) {
        return macro_f1(per_class);
    }
    let n: u64 = per_class.iter().map(|m| m.support).sum();
    let sum: f64 = per_class
        .iter()
        .map(|m| m.support as f64 * m.f1)
        .sum();
    sum / n as f64
}

/// Unweighted mean of per-class F1 over all classes, zero-support included.
pub fn macro_f1(per_class: &[ClassMetrics]) -> f64 {
    if per_class.is_empty() {
        return 0.0;
    }
    let sum: f64 = per_class.iter().map(|m| m.f1).sum();
    sum / per_class.len() as f64
}

/// Builds the full report for one (gold, predicted) pairing over `c` classes.
pub fn evaluate(gold: &[usize], pred: &[usize], c: usize) -> Result<EvalReport, EvalError> {
    let confusion = confusion_matrix(gold, pred, c)?;
    let per_class = per_class_metrics(&confusion);
    let correct: u64 = (0..c).map(|i| confusion[i][i]).sum();
    let accuracy = correct as f64 / gold.len() as f64;
    Ok(EvalReport {
        weighted_f1: weighted_f1(&per_class),
        macro_f1: macro_f1(&per_class),
        accuracy,
        confusion,
        per_class,
    })
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

/// Cross-split aggregate: per-split F1 values with population mean/std.
#[derive(Debug, Clone, PartialEq)]
pub struct CvSummary {
    pub weighted_f1s: Vec<f64>,
    pub macro_f1s: Vec<f64>,
    pub weighted_mean: f64,
    pub weighted_std: f64,
    pub macro_mean: f64,
    pub macro_std: f64,
}

impl CvSummary {
    pub fn from_reports(reports: &[EvalReport]) -> Result<Self, EvalError> {
        if reports.is_empty() {
            return Err(EvalError::NoReports);
        }
        let weighted_f1s: Vec<f64> = reports.iter().map(|r| r.weighted_f1).collect();
        let macro_f1s: Vec<f64> = reports.iter().map(|r| r.macro_f1).collect();
        let (weighted_mean, weighted_std) = mean_std(&weighted_f1s);
        let (macro_mean, macro_std) = mean_std(&macro_f1s);
        Ok(CvSummary {
            weighted_f1s,
            macro_f1s,
            weighted_mean,
            weighted_std,
            macro_mean,
            macro_std,
        })
    }
}
