use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::BoostingParams;
use super::tree::{fit_regressor, Node, Tree, TreeParams};
use crate::rng::stream;

/// Multinomial-deviance gradient boosting: one regression tree per present
/// class per stage, fitted to the residuals `y_k - p_k` with Newton-step
/// leaf values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub n_classes: usize,
    /// Classes seen in training; absent classes get probability 0.
    pub present: Vec<bool>,
    /// Initial scores `log(prior)` (0 for absent classes).
    pub init: Vec<f64>,
    pub learning_rate: f64,
    /// `stages[m][k]` is the tree for the k-th present class at stage m.
    pub stages: Vec<Vec<Tree>>,
    /// Mean training deviance after each stage.
    pub train_deviance: Vec<f64>,
}

fn softmax_present(scores: &[f64], present: &[bool]) -> Vec<f64> {
    let max = scores
        .iter()
        .zip(present)
        .filter(|(_, &p)| p)
        .map(|(s, _)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = scores
        .iter()
        .zip(present)
        .map(|(s, &on)| if on { (s - max).exp() } else { 0.0 })
        .collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= z);
    p
}

fn deviance(scores: &[Vec<f64>], y: &[usize], present: &[bool]) -> f64 {
    let n = y.len() as f64;
    scores
        .iter()
        .zip(y)
        .map(|(s, &c)| {
            let max = s.iter().zip(present).filter(|(_, &p)| p).map(|(v, _)| *v).fold(f64::NEG_INFINITY, f64::max);
            let lse = max
                + s.iter()
                    .zip(present)
                    .filter(|(_, &p)| p)
                    .map(|(v, _)| (v - max).exp())
                    .sum::<f64>()
                    .ln();
            lse - s[c]
        })
        .sum::<f64>()
        / n
}

impl GradientBoosting {
    /// Needs at least two distinct classes in `y`.
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, params: &BoostingParams, seed: u64) -> Self {
        let n = x.len();
        let n_features = x.first().map_or(0, Vec::len);
        let mut counts = vec![0usize; n_classes];
        for &c in y {
            counts[c] += 1;
        }
        let present: Vec<bool> = counts.iter().map(|&c| c > 0).collect();
        let classes: Vec<usize> = (0..n_classes).filter(|&k| present[k]).collect();
        let init: Vec<f64> = counts
            .iter()
            .map(|&c| if c > 0 { (c as f64 / n as f64).ln() } else { 0.0 })
            .collect();
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_samples_split: params.min_samples_split,
            min_samples_leaf: params.min_samples_leaf,
            max_features: params.max_features.resolve(n_features),
        };
        let k_present = classes.len() as f64;
        let newton_scale = (k_present - 1.0) / k_present;
        let n_sub = ((params.subsample * n as f64).floor() as usize).clamp(1, n);

        let mut scores: Vec<Vec<f64>> = vec![init.clone(); n];
        let mut stages = Vec::with_capacity(params.n_estimators);
        let mut train_deviance = Vec::with_capacity(params.n_estimators);
        for m in 0..params.n_estimators {
            let probs: Vec<Vec<f64>> = scores.iter().map(|s| softmax_present(s, &present)).collect();
            let rows: Vec<usize> = if n_sub < n {
                let mut rng = stream(seed, (m * (n_classes + 1) + n_classes) as u64);
                let mut r = sample(&mut rng, n, n_sub).into_vec();
                r.sort_unstable();
                r
            } else {
                (0..n).collect()
            };
            let trees: Vec<Tree> = classes
                .par_iter()
                .map(|&k| {
                    let residual: Vec<f64> = (0..n).map(|i| f64::from(u8::from(y[i] == k)) - probs[i][k]).collect();
                    let mut rng = stream(seed, (m * (n_classes + 1) + k) as u64);
                    let mut tree = fit_regressor(x, &residual, &rows, tree_params, &mut rng);
                    let mut num = vec![0.0; tree.nodes.len()];
                    let mut den = vec![0.0; tree.nodes.len()];
                    for &i in &rows {
                        let leaf = tree.leaf_index(&x[i]);
                        let r = residual[i];
                        num[leaf] += r;
                        den[leaf] += r.abs() * (1.0 - r.abs());
                    }
                    for leaf in 0..tree.nodes.len() {
                        if matches!(tree.nodes[leaf], Node::Leaf { .. }) {
                            let gamma = if den[leaf] < 1e-150 { 0.0 } else { newton_scale * num[leaf] / den[leaf] };
                            tree.set_leaf_value(leaf, vec![gamma]);
                        }
                    }
                    tree
                })
                .collect();
            for (i, s) in scores.iter_mut().enumerate() {
                for (tree, &k) in trees.iter().zip(&classes) {
                    s[k] += params.learning_rate * tree.predict(&x[i])[0];
                }
            }
            train_deviance.push(deviance(&scores, y, &present));
            stages.push(trees);
        }
        GradientBoosting {
            n_classes,
            present,
            init,
            learning_rate: params.learning_rate,
            stages,
            train_deviance,
        }
    }

    pub fn decision_function(&self, x: &[f64]) -> Vec<f64> {
        let mut s = self.init.clone();
        let classes: Vec<usize> = (0..self.n_classes).filter(|&k| self.present[k]).collect();
        for stage in &self.stages {
            for (tree, &k) in stage.iter().zip(&classes) {
                s[k] += self.learning_rate * tree.predict(x)[0];
            }
        }
        s
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        softmax_present(&self.decision_function(x), &self.present)
    }
}
