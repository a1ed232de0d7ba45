use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::{check_row, Dataset};
use super::forest::RandomForest;
use super::gbm::GradientBoosting;
use super::mlp::Mlp;
use super::spec::{Family, Hyperparameters, ModelSpec};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_LEN};
use crate::model::{Condition, FitClass};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "parameters", rename_all = "snake_case")]
pub enum Fitted {
    RandomForest(RandomForest),
    GradientBoosting(GradientBoosting),
    Mlp(Mlp),
}

/// A fitted classifier over the four conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub spec: ModelSpec,
    pub classes: Vec<Condition>,
    pub n_features: usize,
    pub n_samples: usize,
    pub class_counts: Vec<usize>,
    pub fitted: Fitted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub condition: Condition,
    pub probabilities: [f64; Condition::COUNT],
    /// Posterior of the control class.
    pub fit_probability: f64,
    /// `1 - fit_probability`.
    pub unfit_score: f64,
}

impl Prediction {
    /// Argmax over the class order, first class winning ties.
    pub fn from_probabilities(probabilities: [f64; Condition::COUNT]) -> Self {
        let mut best = 0;
        for k in 1..Condition::COUNT {
            if probabilities[k] > probabilities[best] {
                best = k;
            }
        }
        let fit_probability = probabilities[Condition::Control.index()];
        Prediction {
            condition: Condition::ALL[best],
            probabilities,
            fit_probability,
            unfit_score: 1.0 - fit_probability,
        }
    }

    pub fn fit_class(&self) -> FitClass {
        self.condition.fit_class()
    }
}

/// Fits `spec` on feature rows with class indices in condition order.
pub fn fit_matrix(spec: &ModelSpec, x: &[Vec<f64>], y: &[usize]) -> Result<TrainedModel> {
    spec.validate()?;
    if x.is_empty() {
        return Err(Error::TrainingData("no training samples".into()));
    }
    let n_features = x[0].len();
    if let Some(row) = x.iter().find(|r| r.len() != n_features) {
        return Err(Error::LengthMismatch {
            expected: n_features,
            actual: row.len(),
        });
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training features".into()));
    }
    let k = Condition::COUNT;
    let mut counts = vec![0; k];
    for &c in y {
        counts[c] += 1;
    }
    let distinct = counts.iter().filter(|&&c| c > 0).count();
    if distinct < 2 && spec.family() != Family::RandomForest {
        return Err(Error::TrainingData(format!(
            "{} needs at least two classes in the training data",
            spec.family()
        )));
    }
    let fitted = match &spec.hyperparameters {
        Hyperparameters::RandomForest(p) => Fitted::RandomForest(RandomForest::fit(x, y, k, p, spec.seed)),
        Hyperparameters::GradientBoosting(p) => {
            Fitted::GradientBoosting(GradientBoosting::fit(x, y, k, p, spec.seed))
        }
        Hyperparameters::Mlp(p) => Fitted::Mlp(Mlp::fit(x, y, k, p, spec.seed)),
    };
    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        spec: spec.clone(),
        classes: Condition::ALL.to_vec(),
        n_features,
        n_samples: x.len(),
        class_counts: counts,
        fitted,
    })
}

pub fn train(spec: &ModelSpec, data: &Dataset) -> Result<TrainedModel> {
    let (x, y) = data.matrix();
    fit_matrix(spec, &x, &y)
}

impl TrainedModel {
    /// Class probabilities without input validation beyond the length.
    pub(crate) fn proba_unchecked(&self, x: &[f64]) -> [f64; Condition::COUNT] {
        let raw = match &self.fitted {
            Fitted::RandomForest(f) => f.predict_proba(x),
            Fitted::GradientBoosting(g) => g.predict_proba(x),
            Fitted::Mlp(m) => m.predict_proba(x),
        };
        let z: f64 = raw.iter().sum();
        let mut p = [0.0; Condition::COUNT];
        for (dst, v) in p.iter_mut().zip(&raw) {
            *dst = v / z;
        }
        p
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<[f64; Condition::COUNT]> {
        if self.n_features == FEATURE_LEN {
            check_row(x)?;
        } else if x.len() != self.n_features {
            return Err(Error::LengthMismatch {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        Ok(self.proba_unchecked(x))
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        self.predict_proba(x).map(Prediction::from_probabilities)
    }

    pub fn predict_vector(&self, v: &FeatureVector) -> Result<Prediction> {
        self.predict(v.features())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::save_json(path, self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingInput {
                path: path.to_path_buf(),
                hint: "train a model first with `ffd train`".into(),
            });
        }
        let m: TrainedModel = crate::io::load_json(path)?;
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelVersion(self.format_version));
        }
        let k = Condition::COUNT;
        let family_matches = self.spec.family()
            == match self.fitted {
                Fitted::RandomForest(_) => Family::RandomForest,
                Fitted::GradientBoosting(_) => Family::GradientBoosting,
                Fitted::Mlp(_) => Family::Mlp,
            };
        let ok = family_matches
            && self.classes == Condition::ALL
            && match &self.fitted {
                Fitted::RandomForest(f) => {
                    f.n_classes == k && !f.trees.is_empty() && f.trees.iter().all(|t| t.is_well_formed(self.n_features, k))
                }
                Fitted::GradientBoosting(g) => {
                    let present = g.present.iter().filter(|&&p| p).count();
                    g.n_classes == k
                        && g.present.len() == k
                        && g.init.len() == k
                        && present >= 1
                        && g.stages.iter().all(|s| s.len() == present && s.iter().all(|t| t.is_well_formed(self.n_features, 1)))
                }
                Fitted::Mlp(m) => m.is_well_formed(self.n_features, k),
            };
        if !ok {
            return Err(Error::Config("model file is inconsistent with its declared family and classes".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::spec::{BoostingParams, ForestParams, MlpParams};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Four Gaussian clusters, σ = 0.3, whose means are ±3 in every
    /// coordinate (sign pattern alternating with the class bits).
    fn clusters(seed: u64, per_class: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = rand_distr::Normal::new(0.0, 0.3).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..per_class {
            for k in 0..4 {
                let row = (0..FEATURE_LEN)
                    .map(|j| {
                        let bit = (k >> (j % 2)) & 1;
                        if bit == 1 { 3.0 } else { -3.0 }
                    })
                    .map(|m| m + rng.sample(normal))
                    .collect();
                x.push(row);
                y.push(k);
            }
        }
        (x, y)
    }

    fn nearest_centroid_accuracy(x: &[Vec<f64>], y: &[usize]) -> f64 {
        let mut centroid = vec![vec![0.0; FEATURE_LEN]; 4];
        let mut n = [0.0; 4];
        for (r, &c) in x.iter().zip(y) {
            n[c] += 1.0;
            for (a, v) in centroid[c].iter_mut().zip(r) {
                *a += v;
            }
        }
        for (c, cnt) in centroid.iter_mut().zip(n) {
            c.iter_mut().for_each(|v| *v /= cnt);
        }
        let hits = x
            .iter()
            .zip(y)
            .filter(|(r, &c)| {
                let d = |k: usize| r.iter().zip(&centroid[k]).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
                (0..4).min_by(|&a, &b| d(a).total_cmp(&d(b))).unwrap() == c
            })
            .count();
        hits as f64 / x.len() as f64
    }

    fn quick_specs() -> Vec<ModelSpec> {
        vec![
            ModelSpec {
                hyperparameters: Hyperparameters::RandomForest(ForestParams { n_estimators: 50, ..Default::default() }),
                seed: 1,
            },
            ModelSpec {
                hyperparameters: Hyperparameters::GradientBoosting(BoostingParams {
                    n_estimators: 50,
                    learning_rate: 0.1,
                    ..Default::default()
                }),
                seed: 1,
            },
            ModelSpec {
                hyperparameters: Hyperparameters::Mlp(MlpParams::default()),
                seed: 1,
            },
        ]
    }

    #[test]
    fn separable_clusters() {
        let (x, y) = clusters(1, 100);
        assert_eq!(nearest_centroid_accuracy(&x, &y), 1.0);
        let (hx, hy) = clusters(2, 10);
        for spec in quick_specs() {
            let m = fit_matrix(&spec, &x, &y).unwrap();
            let train_hits = x.iter().zip(&y).filter(|(r, &c)| m.predict(r).unwrap().condition.index() == c).count();
            assert!(train_hits as f64 / x.len() as f64 >= 0.99, "{}", spec.family());
            let held = hx.iter().zip(&hy).filter(|(r, &c)| m.predict(r).unwrap().condition.index() == c).count();
            assert_eq!(held, hx.len(), "{}", spec.family());
        }
    }

    #[test]
    fn single_class_forest_and_rejections() {
        let (x, _) = clusters(3, 5);
        let y = vec![0; x.len()];
        let specs = quick_specs();
        let m = fit_matrix(&specs[0], &x, &y).unwrap();
        let p = m.predict(&x[0]).unwrap();
        assert_eq!((p.condition, p.fit_probability), (Condition::Control, 1.0));
        assert!(matches!(fit_matrix(&specs[1], &x, &y), Err(Error::TrainingData(_))));
        assert!(matches!(fit_matrix(&specs[2], &x, &y), Err(Error::TrainingData(_))));
        assert!(matches!(fit_matrix(&specs[0], &[], &[]), Err(Error::TrainingData(_))));
    }

    #[test]
    fn argmax_and_fit_mapping() {
        let p = Prediction::from_probabilities([0.7, 0.2, 0.05, 0.05]);
        assert_eq!((p.condition, p.fit_probability), (Condition::Control, 0.7));
        let tie = Prediction::from_probabilities([0.1, 0.4, 0.4, 0.1]);
        assert_eq!(tie.condition, Condition::Alcohol);
        assert_eq!(tie.fit_class(), FitClass::Unfit);
    }

    #[test]
    fn bad_inputs() {
        let (x, y) = clusters(4, 5);
        let m = fit_matrix(&quick_specs()[0], &x, &y).unwrap();
        assert!(matches!(m.predict(&[0.0; 49]), Err(Error::LengthMismatch { .. })));
        let mut row = x[0].clone();
        row[7] = f64::NAN;
        assert!(matches!(m.predict(&row), Err(Error::NonFinite(_))));
    }

    #[test]
    fn persisted_models_predict_identically() {
        let dir = tempfile::tempdir().unwrap();
        let (x, y) = clusters(5, 10);
        for spec in quick_specs() {
            let m = fit_matrix(&spec, &x, &y).unwrap();
            let path = dir.path().join(format!("{}.json", spec.family()));
            m.save(&path).unwrap();
            let back = TrainedModel::load(&path).unwrap();
            assert_eq!(back, m);
            for r in &x {
                assert_eq!(back.predict_proba(r).unwrap(), m.predict_proba(r).unwrap());
            }
        }
    }

    #[test]
    fn version_checked_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let (x, y) = clusters(6, 3);
        let mut m = fit_matrix(&quick_specs()[0], &x, &y).unwrap();
        m.format_version = 99;
        let path = dir.path().join("m.json");
        crate::io::save_json(&path, &m).unwrap();
        assert!(matches!(TrainedModel::load(&path), Err(Error::ModelVersion(99))));
        assert!(matches!(TrainedModel::load(dir.path().join("none.json")), Err(Error::MissingInput { .. })));
    }

    proptest! {
        #[test]
        fn fit_and_unfit_sum_to_one(raw in prop::array::uniform4(0.0f64..1.0)) {
            let z: f64 = raw.iter().sum::<f64>() + 1e-9;
            let p = Prediction::from_probabilities(raw.map(|v| v / z));
            prop_assert_eq!(p.fit_probability + p.unfit_score, 1.0);
        }
    }
}
