use ffd_core::classifiers::{
    grid_search, Dataset, Family, Grid, Hyperparameters, MaxFeatures, ModelSpec, Split,
};
use ffd_core::features::{FeatureVector, FEATURE_LEN};
use ffd_core::Condition;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

// Control/alcohol by (x0 > 0) XOR (x1 > 0.3); the other 48 columns are
// noise. No sum of per-column terms separates it, so averaged stumps fail.
fn xor(n: usize, seed: u64, split: Split) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|i| {
            let f: Vec<f64> = (0..FEATURE_LEN).map(|_| rng.random_range(-1.0..1.0)).collect();
            let c = Condition::ALL[((f[0] > 0.0) != (f[1] > 0.3)) as usize];
            FeatureVector::new(format!("q{i}"), c, f).unwrap()
        })
        .collect();
    Dataset::new(split, samples)
}

fn forest(n_estimators: usize) -> ModelSpec {
    let mut spec = ModelSpec::default_for(Family::RandomForest).with_seed(11);
    if let Hyperparameters::RandomForest(p) = &mut spec.hyperparameters {
        p.n_estimators = n_estimators;
        p.max_features = MaxFeatures::All;
    }
    spec
}

/// Best accuracy any single threshold on any column can reach on
/// `data`, each side labelled with its majority class.
fn best_stump(data: &Dataset) -> f64 {
    let truth: Vec<Condition> = data.samples.iter().map(|s| s.condition).collect();
    let majority = |idx: &[usize]| {
        let mut n = [0usize; 4];
        for &i in idx {
            n[truth[i].index()] += 1;
        }
        Condition::ALL[(0..4).max_by_key(|&k| (n[k], usize::MAX - k)).unwrap()]
    };
    let mut best = 0.0f64;
    for j in 0..FEATURE_LEN {
        let mut order: Vec<usize> = (0..truth.len()).collect();
        order.sort_by(|&a, &b| data.samples[a].features()[j].total_cmp(&data.samples[b].features()[j]));
        for cut in 1..order.len() {
            let (lo, hi) = order.split_at(cut);
            let (a, b) = (majority(lo), majority(hi));
            let mut pred = vec![a; truth.len()];
            for &i in hi {
                pred[i] = b;
            }
            let hits = pred.iter().zip(&truth).filter(|(p, t)| p == t).count();
            best = best.max(hits as f64 / truth.len() as f64);
        }
    }
    best
}

#[test]
fn deeper_trees_win_on_xor() {
    let train = xor(600, 1, Split::Train);
    let validation = xor(200, 2, Split::Validation);
    let mut grid = Grid::new();
    grid.insert("max_depth".into(), vec![json!(1), json!(5)]);
    let result = grid_search(&forest(30), &grid, &train, &validation, |_| {}).unwrap();

    let stump = best_stump(&validation);
    assert!(stump < 0.75, "stump oracle {stump}");
    let shallow = result.evaluations[0].precision;
    let deep = result.evaluations[1].precision;
    assert_eq!(result.evaluations[0].settings["max_depth"], json!(1));
    eprintln!("stump oracle {stump:.3}  depth 1 {shallow:.3}  depth 5 {deep:.3}");
    assert!(shallow < deep);
    assert!(deep > 0.9, "depth 5 {deep}");
    match &result.best.hyperparameters {
        Hyperparameters::RandomForest(p) => assert_eq!(p.max_depth, Some(5)),
        _ => panic!("wrong family"),
    }
    assert_eq!(result.best_precision, deep);
}

#[test]
fn two_by_three_grid_fits_six_times() {
    let train = xor(80, 3, Split::Train);
    let validation = xor(40, 4, Split::Validation);
    let mut grid = Grid::new();
    grid.insert("criterion".into(), vec![json!("gini"), json!("entropy")]);
    grid.insert("max_depth".into(), vec![json!(1), json!(2), json!(3)]);
    let mut seen = Vec::new();
    let result = grid_search(&forest(5), &grid, &train, &validation, |s| seen.push(s.clone())).unwrap();
    assert_eq!(seen.len(), 6);
    assert_eq!(result.evaluations.len(), 6);
    let depths: Vec<_> = seen
        .iter()
        .map(|s| match &s.hyperparameters {
            Hyperparameters::RandomForest(p) => p.max_depth,
            _ => None,
        })
        .collect();
    assert_eq!(depths, [Some(1), Some(2), Some(3), Some(1), Some(2), Some(3)]);
}
