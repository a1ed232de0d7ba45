use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::confusion::{
    all_class_metrics, confusion_matrix, group_fit_unfit, mean_class_accuracy, ClassMetrics, ConfusionMatrix,
};
use crate::classifiers::{Dataset, TrainedModel};
use crate::error::{Error, Result};
use crate::model::Condition;

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub family: String,
    pub seed: u64,
    pub dataset: String,
    pub n_evaluated: usize,
}

/// Metrics of one confusion matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSummary {
    pub confusion: ConfusionMatrix,
    pub per_class: Vec<ClassMetrics>,
    pub overall_accuracy: f64,
    pub mean_class_accuracy: f64,
}

impl MatrixSummary {
    pub fn new(confusion: ConfusionMatrix) -> Self {
        MatrixSummary {
            per_class: all_class_metrics(&confusion),
            overall_accuracy: confusion.accuracy(),
            mean_class_accuracy: mean_class_accuracy(&confusion),
            confusion,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub format_version: u32,
    pub metadata: ReportMetadata,
    pub conditions: MatrixSummary,
    pub fit_unfit: MatrixSummary,
}

impl EvaluationReport {
    pub fn new(cm4: ConfusionMatrix, metadata: ReportMetadata) -> Result<Self> {
        let cm2 = group_fit_unfit(&cm4)?;
        Ok(EvaluationReport {
            format_version: REPORT_FORMAT_VERSION,
            metadata,
            conditions: MatrixSummary::new(cm4),
            fit_unfit: MatrixSummary::new(cm2),
        })
    }

    pub fn from_pairs(pairs: &[(Condition, Condition)], metadata: ReportMetadata) -> Result<Self> {
        Self::new(confusion_matrix(pairs)?, metadata)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let r: EvaluationReport = crate::io::load_json(path)?;
        if r.format_version != REPORT_FORMAT_VERSION {
            return Err(Error::ModelVersion(r.format_version));
        }
        Ok(r)
    }

    /// Aligned plain-text rendering: a metrics table with one row per
    /// condition and per Fit/Unfit group, then both confusion matrices.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let m = &self.metadata;
        let _ = writeln!(out, "model {}  seed {}  data {}  n {}", m.family, m.seed, m.dataset, m.n_evaluated);
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<10} {:>6} {:>12} {:>12} {:>8} {:>9}",
            "class", "n", "sensitivity", "specificity", "f1", "accuracy"
        );
        for summary in [&self.conditions, &self.fit_unfit] {
            for (k, c) in summary.per_class.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{:<10} {:>6} {:>12} {:>12} {:>8} {:>9}",
                    c.class,
                    summary.confusion.row_total(k),
                    pct(c.sensitivity),
                    pct(c.specificity),
                    pct(c.f1),
                    pct(c.accuracy)
                );
            }
        }
        let _ = writeln!(out);
        for (label, s) in [("4-class", &self.conditions), ("fit/unfit", &self.fit_unfit)] {
            let _ = writeln!(
                out,
                "{label:<10} overall accuracy {}  mean per-class accuracy {}",
                pct(s.overall_accuracy),
                pct(s.mean_class_accuracy)
            );
        }
        for s in [&self.conditions, &self.fit_unfit] {
            let _ = writeln!(out);
            out.push_str(&matrix_table(&s.confusion));
        }
        out
    }
}

fn pct(v: f64) -> String {
    format!("{:.1}%", 100.0 * v)
}

fn matrix_table(cm: &ConfusionMatrix) -> String {
    let mut out = String::new();
    let _ = write!(out, "  {:<12}", "true\\pred");
    for c in &cm.classes {
        let _ = write!(out, " {c:>16}");
    }
    out.push('\n');
    for (i, row) in cm.counts.iter().enumerate() {
        let _ = write!(out, "  {:<12}", cm.classes[i]);
        let n = cm.row_total(i);
        for &v in row {
            let share = if n == 0 { 0.0 } else { v as f64 / n as f64 };
            let _ = write!(out, " {:>16}", format!("{v} ({})", pct(share)));
        }
        out.push('\n');
    }
    out
}

/// Predicts every sample of `data` and builds the report.
pub fn evaluate(model: &TrainedModel, data: &Dataset, dataset_label: &str) -> Result<EvaluationReport> {
    let pairs = data
        .samples
        .iter()
        .map(|v| Ok((v.condition, model.predict_vector(v)?.condition)))
        .collect::<Result<Vec<_>>>()?;
    let metadata = ReportMetadata {
        family: model.spec.family().to_string(),
        seed: model.spec.seed,
        dataset: dataset_label.to_string(),
        n_evaluated: pairs.len(),
    };
    EvaluationReport::from_pairs(&pairs, metadata)
}

#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub json: PathBuf,
    pub table: PathBuf,
}

/// Writes `report.json` and `report.txt` under `out_dir`.
pub fn render_report(report: &EvaluationReport, out_dir: impl AsRef<Path>) -> Result<ReportFiles> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json = dir.join("report.json");
    crate::io::save_json(&json, report)?;
    let table = dir.join("report.txt");
    fs::write(&table, report.to_table()).map_err(|e| Error::io(&table, e))?;
    Ok(ReportFiles { json, table })
}
