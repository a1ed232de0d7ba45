use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::spec::Criterion;

/// Nodes of a fitted tree, stored flat; children are indices into the same
/// array and node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Index of the leaf reached by `x`; samples with `x[feature] <=
    /// threshold` go left.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { .. } => return i,
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> &[f64] {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!("leaf_index stops at leaves"),
        }
    }

    pub(crate) fn set_leaf_value(&mut self, index: usize, v: Vec<f64>) {
        if let Node::Leaf { value } = &mut self.nodes[index] {
            *value = v;
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Structural check for trees read from disk.
    pub(crate) fn is_well_formed(&self, n_features: usize, leaf_len: usize) -> bool {
        let n = self.nodes.len();
        n > 0
            && self.nodes.iter().enumerate().all(|(i, node)| match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => *feature < n_features && !threshold.is_nan() && *left > i && *right > i && *left < n && *right < n,
                Node::Leaf { value } => value.len() == leaf_len && value.iter().all(|v| v.is_finite()),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Features drawn (without replacement) at each node; when it is at
    /// least the feature count every feature is tried in natural order.
    pub max_features: usize,
}

enum Target<'a> {
    Classes {
        y: &'a [usize],
        n_classes: usize,
        criterion: Criterion,
    },
    Values(&'a [f64]),
}

struct Builder<'a, R> {
    x: &'a [Vec<f64>],
    target: Target<'a>,
    params: TreeParams,
    n_features: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

/// Classification tree over the rows listed in `rows` (repeats act as
/// weights, as in a bootstrap sample). Leaves hold class proportions.
pub fn fit_classifier<R: Rng>(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    rows: &[usize],
    criterion: Criterion,
    params: TreeParams,
    rng: &mut R,
) -> Tree {
    let target = Target::Classes { y, n_classes, criterion };
    Builder::new(x, target, params, rng).run(rows)
}

/// Regression tree with squared-error splits; leaves hold the mean target.
pub fn fit_regressor<R: Rng>(x: &[Vec<f64>], targets: &[f64], rows: &[usize], params: TreeParams, rng: &mut R) -> Tree {
    Builder::new(x, Target::Values(targets), params, rng).run(rows)
}

fn impurity(counts: &[f64], total: f64, criterion: Criterion) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    match criterion {
        Criterion::Entropy => -counts
            .iter()
            .filter(|&&c| c > 0.0)
            .map(|&c| {
                let p = c / total;
                p * p.log2()
            })
            .sum::<f64>(),
        Criterion::Gini => 1.0 - counts.iter().map(|&c| (c / total).powi(2)).sum::<f64>(),
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl<'a, R: Rng> Builder<'a, R> {
    fn new(x: &'a [Vec<f64>], target: Target<'a>, params: TreeParams, rng: &'a mut R) -> Self {
        let n_features = x.first().map_or(0, Vec::len);
        Builder {
            x,
            target,
            params,
            n_features,
            rng,
            nodes: Vec::new(),
        }
    }

    fn run(mut self, rows: &[usize]) -> Tree {
        let mut rows = rows.to_vec();
        self.grow(&mut rows, 0);
        Tree { nodes: self.nodes }
    }

    fn leaf_value(&self, rows: &[usize]) -> Vec<f64> {
        match &self.target {
            Target::Classes { y, n_classes, .. } => {
                let mut counts = vec![0.0; *n_classes];
                for &r in rows {
                    counts[y[r]] += 1.0;
                }
                let n = rows.len() as f64;
                counts.iter_mut().for_each(|c| *c /= n);
                counts
            }
            Target::Values(t) => vec![rows.iter().map(|&r| t[r]).sum::<f64>() / rows.len() as f64],
        }
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        match &self.target {
            Target::Classes { y, .. } => rows.iter().all(|&r| y[r] == y[rows[0]]),
            Target::Values(t) => rows.iter().all(|&r| t[r] == t[rows[0]]),
        }
    }

    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: Vec::new() });
        let p = self.params;
        let n = rows.len();
        let splittable = n >= p.min_samples_split
            && n >= 2 * p.min_samples_leaf
            && p.max_depth.is_none_or(|d| depth < d)
            && !self.is_pure(rows);
        if splittable {
            if let Some(split) = self.best_split(rows) {
                let (mut left, mut right): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&r| self.x[r][split.feature] <= split.threshold);
                let l = self.grow(&mut left, depth + 1);
                let r = self.grow(&mut right, depth + 1);
                self.nodes[id] = Node::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left: l,
                    right: r,
                };
                return id;
            }
        }
        self.nodes[id] = Node::Leaf {
            value: self.leaf_value(rows),
        };
        id
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let mut features: Vec<usize> = (0..self.n_features).collect();
        if self.params.max_features < self.n_features {
            let (chosen, _) = features.partial_shuffle(self.rng, self.params.max_features);
            chosen.to_vec()
        } else {
            features
        }
    }

    fn best_split(&mut self, rows: &[usize]) -> Option<Split> {
        let mut best: Option<Split> = None;
        let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
        for feature in self.candidate_features() {
            sorted.clear();
            sorted.extend(rows.iter().map(|&r| (self.x[r][feature], r)));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if let Some((threshold, gain)) = self.scan(&sorted) {
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Split {
                        feature,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }

    /// Best threshold along one sorted feature column, with its impurity
    /// decrease (unnormalised).
    fn scan(&self, sorted: &[(f64, usize)]) -> Option<(f64, f64)> {
        let n = sorted.len();
        let min_leaf = self.params.min_samples_leaf;
        let mut best: Option<(usize, f64)> = None;
        match &self.target {
            Target::Classes { y, n_classes, criterion } => {
                let mut total = vec![0.0; *n_classes];
                for &(_, r) in sorted {
                    total[y[r]] += 1.0;
                }
                let parent = n as f64 * impurity(&total, n as f64, *criterion);
                let mut left = vec![0.0; *n_classes];
                let mut right = total.clone();
                for i in 1..n {
                    let c = y[sorted[i - 1].1];
                    left[c] += 1.0;
                    right[c] -= 1.0;
                    if i < min_leaf || n - i < min_leaf || sorted[i - 1].0 == sorted[i].0 {
                        continue;
                    }
                    let (nl, nr) = (i as f64, (n - i) as f64);
                    let child = nl * impurity(&left, nl, *criterion) + nr * impurity(&right, nr, *criterion);
                    let gain = parent - child;
                    if gain > 0.0 && best.is_none_or(|(_, g)| gain > g) {
                        best = Some((i, gain));
                    }
                }
            }
            Target::Values(t) => {
                let total: f64 = sorted.iter().map(|&(_, r)| t[r]).sum();
                let parent = total * total / n as f64;
                let mut sum_left = 0.0;
                for i in 1..n {
                    sum_left += t[sorted[i - 1].1];
                    if i < min_leaf || n - i < min_leaf || sorted[i - 1].0 == sorted[i].0 {
                        continue;
                    }
                    let sum_right = total - sum_left;
                    let proxy = sum_left * sum_left / i as f64 + sum_right * sum_right / (n - i) as f64;
                    let gain = proxy - parent;
                    if gain > 0.0 && best.is_none_or(|(_, g)| gain > g) {
                        best = Some((i, gain));
                    }
                }
            }
        }
        best.map(|(i, gain)| {
            let (lo, hi) = (sorted[i - 1].0, sorted[i].0);
            let mid = lo + (hi - lo) / 2.0;
            let threshold = if mid < hi { mid } else { lo };
            (threshold, gain)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(depth: usize) -> TreeParams {
        TreeParams {
            max_depth: Some(depth),
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: usize::MAX,
        }
    }

    #[test]
    fn single_threshold() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<usize> = (0..10).map(|i| usize::from(i >= 6)).collect();
        let rows: Vec<usize> = (0..10).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = fit_classifier(&x, &y, 2, &rows, Criterion::Entropy, params(3), &mut rng);
        assert_eq!(tree.n_leaves(), 2);
        match &tree.nodes[0] {
            Node::Split { threshold, .. } => assert_eq!(*threshold, 5.5),
            _ => panic!("expected a split"),
        }
        assert_eq!(tree.predict(&[2.0]), &[1.0, 0.0]);
        assert_eq!(tree.predict(&[7.0]), &[0.0, 1.0]);
    }

    #[test]
    fn pure_node_is_a_leaf() {
        let x = vec![vec![1.0], vec![2.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = fit_classifier(&x, &[1, 1], 3, &[0, 1], Criterion::Gini, params(5), &mut rng);
        assert_eq!(tree.nodes, vec![Node::Leaf { value: vec![0.0, 1.0, 0.0] }]);
    }

    #[test]
    fn min_leaf_respected() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<usize> = (0..10).map(|i| usize::from(i >= 9)).collect();
        let rows: Vec<usize> = (0..10).collect();
        let p = TreeParams {
            min_samples_leaf: 3,
            ..params(5)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = fit_classifier(&x, &y, 2, &rows, Criterion::Entropy, p, &mut rng);
        for (i, node) in tree.nodes.iter().enumerate() {
            if let Node::Leaf { .. } = node {
                let support = (0..10).filter(|&r| tree.leaf_index(&x[r]) == i).count();
                assert!(support >= 3);
            }
        }
    }

    #[test]
    fn regression_means() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, 0.0]).collect();
        let t = [1.0, 1.0, 1.0, 1.0, 5.0, 5.0, 7.0, 7.0];
        let rows: Vec<usize> = (0..8).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = fit_regressor(&x, &t, &rows, params(1), &mut rng);
        assert_eq!(tree.predict(&[0.0, 0.0]), &[1.0]);
        assert_eq!(tree.predict(&[6.0, 0.0]), &[6.0]);
        let deep = fit_regressor(&x, &t, &rows, params(4), &mut rng);
        assert_eq!(deep.predict(&[4.0, 0.0]), &[5.0]);
        assert_eq!(deep.n_leaves(), 3);
    }

    #[test]
    fn repeated_rows_weigh_more() {
        let x = vec![vec![0.0], vec![1.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = TreeParams {
            max_depth: Some(0),
            ..params(0)
        };
        let tree = fit_classifier(&x, &[0, 1], 2, &[0, 0, 0, 1], Criterion::Entropy, p, &mut rng);
        assert_eq!(tree.predict(&[0.0]), &[0.75, 0.25]);
    }

    proptest! {
        #[test]
        fn depth_bounded_and_leaves_are_distributions(
            seed in 0u64..1000, depth in 0usize..6, n in 2usize..60,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
            let rows: Vec<usize> = (0..n).collect();
            let p = TreeParams { max_features: 2, ..params(depth) };
            let tree = fit_classifier(&x, &y, 3, &rows, Criterion::Entropy, p, &mut rng);
            prop_assert!(tree.depth() <= depth);
            prop_assert!(tree.is_well_formed(4, 3));
            for node in &tree.nodes {
                if let Node::Leaf { value } = node {
                    prop_assert!((value.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
