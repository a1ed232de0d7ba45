use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::ForestParams;
use super::tree::{fit_classifier, Tree, TreeParams};

/// Bagged classification trees; predictions average the leaf class
/// distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_classes: usize,
    pub trees: Vec<Tree>,
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, params: &ForestParams, seed: u64) -> Self {
        let n = x.len();
        let n_features = x.first().map_or(0, Vec::len);
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_samples_split: params.min_samples_split,
            min_samples_leaf: params.min_samples_leaf,
            max_features: params.max_features.resolve(n_features),
        };
        let trees = (0..params.n_estimators)
            .into_par_iter()
            .map(|i| {
                let mut rng = crate::rng::stream(seed, i as u64);
                let rows: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                fit_classifier(x, y, n_classes, &rows, params.criterion, tree_params, &mut rng)
            })
            .collect();
        RandomForest { n_classes, trees }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (acc, v) in p.iter_mut().zip(tree.predict(x)) {
                *acc += v;
            }
        }
        let k = self.trees.len() as f64;
        p.iter_mut().for_each(|v| *v /= k);
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::spec::{Criterion, MaxFeatures};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(seed: u64, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = (0..n).map(|_| (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y = (0..n).map(|_| rng.random_range(0..4)).collect();
        (x, y)
    }

    #[test]
    fn single_class_is_trivial() {
        let (x, _) = random_data(1, 30, 5);
        let y = vec![0; 30];
        let f = RandomForest::fit(&x, &y, 4, &ForestParams { n_estimators: 10, ..Default::default() }, 0);
        assert_eq!(f.predict_proba(&x[3]), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn seeded_and_order_independent_of_threads() {
        let (x, y) = random_data(2, 80, 10);
        let p = ForestParams {
            n_estimators: 20,
            ..Default::default()
        };
        let a = RandomForest::fit(&x, &y, 4, &p, 5);
        let b = RandomForest::fit(&x, &y, 4, &p, 5);
        assert_eq!(a, b);
        let c = RandomForest::fit(&x, &y, 4, &p, 6);
        assert_ne!(a, c);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn one_unbagged_tree_is_plain_cart(seed in 0u64..u64::MAX, n in 5usize..80) {
            let (x, y) = random_data(seed, n, 6);
            let p = ForestParams {
                n_estimators: 1,
                max_features: MaxFeatures::All,
                bootstrap: false,
                max_depth: Some(4),
                min_samples_split: 2,
                min_samples_leaf: 1,
                criterion: Criterion::Entropy,
                cv_folds: 5,
            };
            let forest = RandomForest::fit(&x, &y, 4, &p, seed);
            let tp = TreeParams { max_depth: Some(4), min_samples_split: 2, min_samples_leaf: 1, max_features: 6 };
            let rows: Vec<usize> = (0..n).collect();
            let tree = fit_classifier(&x, &y, 4, &rows, Criterion::Entropy, tp, &mut ChaCha8Rng::seed_from_u64(0));
            let (probe, _) = random_data(seed ^ 1, 50, 6);
            for q in x.iter().chain(&probe) {
                prop_assert_eq!(forest.predict_proba(q), tree.predict(q).to_vec());
            }
        }
    }
}
