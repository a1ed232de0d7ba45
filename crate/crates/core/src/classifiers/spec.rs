use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RandomForest,
    GradientBoosting,
    Mlp,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::RandomForest, Family::GradientBoosting, Family::Mlp];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::RandomForest => "random_forest",
            Family::GradientBoosting => "gradient_boosting",
            Family::Mlp => "mlp",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown model family `{s}` (expected random_forest, gradient_boosting or mlp)")))
    }
}

/// Number of features examined per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "MaxFeaturesRepr", into = "MaxFeaturesRepr")]
pub enum MaxFeatures {
    /// `floor(sqrt(n_features))`.
    Auto,
    All,
    Count(usize),
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MaxFeaturesName {
    Auto,
    All,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum MaxFeaturesRepr {
    Name(MaxFeaturesName),
    Count(usize),
}

impl From<MaxFeaturesRepr> for MaxFeatures {
    fn from(r: MaxFeaturesRepr) -> Self {
        match r {
            MaxFeaturesRepr::Name(MaxFeaturesName::Auto) => MaxFeatures::Auto,
            MaxFeaturesRepr::Name(MaxFeaturesName::All) => MaxFeatures::All,
            MaxFeaturesRepr::Count(n) => MaxFeatures::Count(n),
        }
    }
}

impl From<MaxFeatures> for MaxFeaturesRepr {
    fn from(m: MaxFeatures) -> Self {
        match m {
            MaxFeatures::Auto => MaxFeaturesRepr::Name(MaxFeaturesName::Auto),
            MaxFeatures::All => MaxFeaturesRepr::Name(MaxFeaturesName::All),
            MaxFeatures::Count(n) => MaxFeaturesRepr::Count(n),
        }
    }
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let n = match self {
            MaxFeatures::Auto => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::All => n_features,
            MaxFeatures::Count(n) => n,
        };
        n.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Entropy,
    Gini,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub cv_folds: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 1000,
            criterion: Criterion::Entropy,
            max_depth: Some(5),
            min_samples_split: 5,
            min_samples_leaf: 3,
            max_features: MaxFeatures::Auto,
            bootstrap: true,
            cv_folds: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoostingLoss {
    /// Multinomial deviance.
    Deviance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionCriterion {
    SquaredError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostingParams {
    pub loss: BoostingLoss,
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub subsample: f64,
    pub criterion: RegressionCriterion,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
    pub cv_folds: usize,
}

impl Default for BoostingParams {
    fn default() -> Self {
        BoostingParams {
            loss: BoostingLoss::Deviance,
            learning_rate: 0.01,
            n_estimators: 1000,
            subsample: 1.0,
            criterion: RegressionCriterion::SquaredError,
            min_samples_split: 10,
            min_samples_leaf: 5,
            max_depth: Some(5),
            max_features: MaxFeatures::Auto,
            cv_folds: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningRateSchedule {
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "BatchSizeRepr", into = "BatchSizeRepr")]
pub enum BatchSize {
    /// `min(200, n_samples)`.
    Auto,
    Fixed(usize),
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum BatchSizeName {
    Auto,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum BatchSizeRepr {
    Name(BatchSizeName),
    Fixed(usize),
}

impl From<BatchSizeRepr> for BatchSize {
    fn from(r: BatchSizeRepr) -> Self {
        match r {
            BatchSizeRepr::Name(BatchSizeName::Auto) => BatchSize::Auto,
            BatchSizeRepr::Fixed(n) => BatchSize::Fixed(n),
        }
    }
}

impl From<BatchSize> for BatchSizeRepr {
    fn from(b: BatchSize) -> Self {
        match b {
            BatchSize::Auto => BatchSizeRepr::Name(BatchSizeName::Auto),
            BatchSize::Fixed(n) => BatchSizeRepr::Fixed(n),
        }
    }
}

impl BatchSize {
    pub fn resolve(self, n_samples: usize) -> usize {
        match self {
            BatchSize::Auto => n_samples.min(200),
            BatchSize::Fixed(n) => n.clamp(1, n_samples.max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpParams {
    pub hidden_layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub solver: Solver,
    /// L2 penalty.
    pub alpha: f64,
    pub batch_size: BatchSize,
    pub learning_rate: LearningRateSchedule,
    pub learning_rate_init: f64,
    pub max_iter: usize,
    /// Minimum epoch-loss improvement that resets the patience counter.
    pub tol: f64,
    pub n_iter_no_change: usize,
    pub shuffle: bool,
    pub beta_1: f64,
    pub beta_2: f64,
    pub epsilon: f64,
    pub cv_folds: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden_layer_sizes: vec![25, 10],
            activation: Activation::Relu,
            solver: Solver::Adam,
            alpha: 1e-5,
            batch_size: BatchSize::Auto,
            learning_rate: LearningRateSchedule::Constant,
            learning_rate_init: 1e-3,
            max_iter: 300,
            tol: 1e-6,
            n_iter_no_change: 10,
            shuffle: true,
            beta_1: 0.9,
            beta_2: 0.999,
            epsilon: 1e-8,
            cv_folds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "hyperparameters", rename_all = "snake_case")]
pub enum Hyperparameters {
    RandomForest(ForestParams),
    GradientBoosting(BoostingParams),
    Mlp(MlpParams),
}

impl Hyperparameters {
    pub fn family(&self) -> Family {
        match self {
            Hyperparameters::RandomForest(_) => Family::RandomForest,
            Hyperparameters::GradientBoosting(_) => Family::GradientBoosting,
            Hyperparameters::Mlp(_) => Family::Mlp,
        }
    }

    pub fn cv_folds(&self) -> usize {
        match self {
            Hyperparameters::RandomForest(p) => p.cv_folds,
            Hyperparameters::GradientBoosting(p) => p.cv_folds,
            Hyperparameters::Mlp(p) => p.cv_folds,
        }
    }
}

/// A model family, its hyperparameters and the training seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub hyperparameters: Hyperparameters,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn default_for(family: Family) -> Self {
        let hyperparameters = match family {
            Family::RandomForest => Hyperparameters::RandomForest(ForestParams::default()),
            Family::GradientBoosting => Hyperparameters::GradientBoosting(BoostingParams::default()),
            Family::Mlp => Hyperparameters::Mlp(MlpParams::default()),
        };
        ModelSpec { hyperparameters, seed: 0 }
    }

    pub fn family(&self) -> Family {
        self.hyperparameters.family()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Checks ranges that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("{}: {msg}", self.family())));
        match &self.hyperparameters {
            Hyperparameters::RandomForest(p) => {
                if p.n_estimators == 0 {
                    return bad("n_estimators must be at least 1");
                }
                if p.min_samples_split < 2 || p.min_samples_leaf < 1 {
                    return bad("min_samples_split must be >= 2 and min_samples_leaf >= 1");
                }
            }
            Hyperparameters::GradientBoosting(p) => {
                if p.n_estimators == 0 {
                    return bad("n_estimators must be at least 1");
                }
                if !(p.learning_rate > 0.0 && p.learning_rate.is_finite()) {
                    return bad("learning_rate must be positive");
                }
                if !(p.subsample > 0.0 && p.subsample <= 1.0) {
                    return bad("subsample must lie in (0, 1]");
                }
                if p.min_samples_split < 2 || p.min_samples_leaf < 1 {
                    return bad("min_samples_split must be >= 2 and min_samples_leaf >= 1");
                }
            }
            Hyperparameters::Mlp(p) => {
                if p.hidden_layer_sizes.contains(&0) {
                    return bad("hidden layers need at least one unit");
                }
                if !(p.learning_rate_init > 0.0) || p.alpha < 0.0 || p.max_iter == 0 {
                    return bad("learning_rate_init must be positive, alpha non-negative, max_iter >= 1");
                }
            }
        }
        if self.hyperparameters.cv_folds() < 2 {
            return bad("cv_folds must be at least 2");
        }
        Ok(())
    }
}
