//! Random forest, gradient boosting and multilayer perceptron classifiers
//! over behavioural feature vectors, with stratified k-fold validation and
//! exhaustive grid search.

mod cv;
mod dataset;
mod forest;
mod gbm;
mod grid;
mod mlp;
mod spec;
mod trained;
mod tree;

pub use cv::{fold_assignment, kfold_cv, CvReport, FoldResult};
pub use dataset::{Dataset, Split};
pub use forest::RandomForest;
pub use gbm::GradientBoosting;
pub use grid::{expand_grid, grid_search, macro_precision, Grid, GridEvaluation, GridResult};
pub use mlp::{Dense, Mlp, Standardizer};
pub use spec::{
    Activation, BatchSize, BoostingLoss, BoostingParams, Criterion, Family, ForestParams, Hyperparameters,
    LearningRateSchedule, MaxFeatures, MlpParams, ModelSpec, RegressionCriterion, Solver,
};
pub use trained::{fit_matrix, train, Fitted, Prediction, TrainedModel, MODEL_FORMAT_VERSION};
pub use tree::{fit_classifier, fit_regressor, Node, Tree, TreeParams};
