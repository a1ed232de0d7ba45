use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Condition, FitClass};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::Confusion("no classes".into()));
        }
        if counts.len() != classes.len() || counts.iter().any(|r| r.len() != classes.len()) {
            return Err(Error::Confusion(format!(
                "counts must be a {0}x{0} grid",
                classes.len()
            )));
        }
        Ok(ConfusionMatrix { classes, counts })
    }

    pub fn size(&self) -> usize {
        self.classes.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.size()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_total(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn column_total(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    /// Fraction of correctly classified cases; 0 for an all-zero matrix.
    pub fn accuracy(&self) -> f64 {
        ratio(self.correct(), self.total()).unwrap_or(0.0)
    }

    pub fn one_vs_rest(&self, target: usize) -> OneVsRest {
        let tp = self.counts[target][target];
        let fn_ = self.row_total(target) - tp;
        let fp = self.column_total(target) - tp;
        OneVsRest {
            tp,
            fp,
            fn_,
            tn: self.total() - tp - fp - fn_,
        }
    }
}

/// Four-class matrix over the conditions in class order.
pub fn confusion_matrix(pairs: &[(Condition, Condition)]) -> Result<ConfusionMatrix> {
    if pairs.is_empty() {
        return Err(Error::Confusion("no (true, predicted) pairs".into()));
    }
    let mut counts = vec![vec![0u64; Condition::COUNT]; Condition::COUNT];
    for &(truth, pred) in pairs {
        counts[truth.index()][pred.index()] += 1;
    }
    ConfusionMatrix::new(Condition::ALL.iter().map(|c| c.to_string()).collect(), counts)
}

/// Collapses a four-class matrix into Fit (control) versus Unfit (the other
/// three conditions) by summing blocks.
pub fn group_fit_unfit(cm4: &ConfusionMatrix) -> Result<ConfusionMatrix> {
    let expected: Vec<String> = Condition::ALL.iter().map(|c| c.to_string()).collect();
    if cm4.classes != expected {
        return Err(Error::Confusion(format!(
            "grouping needs classes [{}], got [{}]",
            expected.join(", "),
            cm4.classes.join(", ")
        )));
    }
    let mut counts = vec![vec![0u64; 2]; 2];
    for (i, row) in cm4.counts.iter().enumerate() {
        let gi = group_index(Condition::ALL[i]);
        for (j, &c) in row.iter().enumerate() {
            counts[gi][group_index(Condition::ALL[j])] += c;
        }
    }
    ConfusionMatrix::new(FitClass::ALL.iter().map(|c| c.as_str().to_string()).collect(), counts)
}

fn group_index(c: Condition) -> usize {
    match c.fit_class() {
        FitClass::Fit => 0,
        FitClass::Unfit => 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneVsRest {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub counts: OneVsRest,
    pub sensitivity: f64,
    pub specificity: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Metrics whose denominator was zero and were reported as 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// One-vs-rest metrics for class `target`. Each value is a single integer
/// division, so it is the correctly rounded value of the exact fraction.
///
/// Panics if `target` is out of range.
pub fn class_metrics(cm: &ConfusionMatrix, target: usize) -> ClassMetrics {
    let c = cm.one_vs_rest(target);
    let mut undefined = Vec::new();
    let mut metric = |name: &str, num: u64, den: u64| {
        ratio(num, den).unwrap_or_else(|| {
            undefined.push(name.to_string());
            0.0
        })
    };
    let sensitivity = metric("sensitivity", c.tp, c.tp + c.fn_);
    let specificity = metric("specificity", c.tn, c.tn + c.fp);
    let f1 = metric("f1", 2 * c.tp, 2 * c.tp + c.fp + c.fn_);
    let accuracy = metric("accuracy", c.tp + c.tn, c.tp + c.fp + c.fn_ + c.tn);
    ClassMetrics {
        class: cm.classes[target].clone(),
        counts: c,
        sensitivity,
        specificity,
        f1,
        accuracy,
        undefined,
    }
}

pub fn all_class_metrics(cm: &ConfusionMatrix) -> Vec<ClassMetrics> {
    (0..cm.size()).map(|k| class_metrics(cm, k)).collect()
}

/// Mean over classes of the per-class recall (balanced accuracy). Classes
/// with no true cases are left out.
pub fn mean_class_accuracy(cm: &ConfusionMatrix) -> f64 {
    let recalls: Vec<f64> = (0..cm.size())
        .filter_map(|k| ratio(cm.counts[k][k], cm.row_total(k)))
        .collect();
    if recalls.is_empty() {
        0.0
    } else {
        recalls.iter().sum::<f64>() / recalls.len() as f64
    }
}
