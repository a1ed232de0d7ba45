//! Confusion matrices, one-vs-rest metrics, Fit/Unfit grouping, the
//! behavioural curve analysis and report rendering.

mod behaviour;
mod confusion;
mod report;

pub use behaviour::{behavioural_analysis, behavioural_report, BehaviouralAnalysis, Figure, QUANTITIES};
pub use confusion::{
    all_class_metrics, class_metrics, confusion_matrix, group_fit_unfit, mean_class_accuracy, ClassMetrics,
    ConfusionMatrix, OneVsRest,
};
pub use report::{
    evaluate, render_report, EvaluationReport, MatrixSummary, ReportFiles, ReportMetadata, REPORT_FORMAT_VERSION,
};
