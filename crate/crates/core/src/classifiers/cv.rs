use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::spec::ModelSpec;
use super::trained::fit_matrix;
use crate::error::{Error, Result};
use crate::model::Condition;

/// Stratified fold labels: each class's samples are shuffled with `seed`
/// and dealt round-robin, so fold sizes differ by at most one per class.
pub fn fold_assignment(y: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Config(format!("k-fold needs k >= 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; y.len()];
    let mut position = 0;
    for class in 0..Condition::COUNT {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            return Err(Error::InsufficientClassSamples {
                class: Condition::ALL[class].to_string(),
                count: members.len(),
                required: k,
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            fold[i] = position % k;
            position += 1;
        }
    }
    Ok(fold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_test: usize,
    pub accuracy: f64,
    /// Per-condition sensitivity; `None` for classes absent from the fold.
    pub sensitivity: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_sensitivity: Vec<Option<f64>>,
    pub std_sensitivity: Vec<Option<f64>>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Stratified k-fold cross-validation of `spec` on `data`; folds are drawn
/// from `spec.seed`.
pub fn kfold_cv(spec: &ModelSpec, data: &Dataset, k: usize) -> Result<CvReport> {
    let (x, y) = data.matrix();
    let assignment = fold_assignment(&y, k, spec.seed)?;
    let mut folds = Vec::with_capacity(k);
    for f in 0..k {
        let (train, test): (Vec<usize>, Vec<usize>) = (0..x.len()).partition(|&i| assignment[i] != f);
        let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
        let ty: Vec<usize> = train.iter().map(|&i| y[i]).collect();
        let model = fit_matrix(spec, &tx, &ty)?;
        let mut hits = [0usize; Condition::COUNT];
        let mut totals = [0usize; Condition::COUNT];
        for &i in &test {
            let pred = model.predict_proba(&x[i]).map(super::Prediction::from_probabilities)?;
            totals[y[i]] += 1;
            if pred.condition.index() == y[i] {
                hits[y[i]] += 1;
            }
        }
        folds.push(FoldResult {
            fold: f,
            n_test: test.len(),
            accuracy: hits.iter().sum::<usize>() as f64 / test.len() as f64,
            sensitivity: (0..Condition::COUNT)
                .map(|c| (totals[c] > 0).then(|| hits[c] as f64 / totals[c] as f64))
                .collect(),
        });
    }
    let (mean_accuracy, std_accuracy) = mean_std(&folds.iter().map(|f| f.accuracy).collect::<Vec<_>>());
    let per_class: Vec<Option<(f64, f64)>> = (0..Condition::COUNT)
        .map(|c| {
            let v: Vec<f64> = folds.iter().filter_map(|f| f.sensitivity[c]).collect();
            (!v.is_empty()).then(|| mean_std(&v))
        })
        .collect();
    Ok(CvReport {
        k,
        seed: spec.seed,
        folds,
        mean_accuracy,
        std_accuracy,
        mean_sensitivity: per_class.iter().map(|s| s.map(|s| s.0)).collect(),
        std_sensitivity: per_class.iter().map(|s| s.map(|s| s.1)).collect(),
    })
}
