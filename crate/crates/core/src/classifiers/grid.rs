use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::dataset::Dataset;
use super::spec::ModelSpec;
use super::trained::train;
use crate::error::{Error, Result};
use crate::model::Condition;

/// Candidate values per hyperparameter name. `seed` is accepted as a key
/// alongside the family's own hyperparameters.
pub type Grid = BTreeMap<String, Vec<Value>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEvaluation {
    pub settings: BTreeMap<String, Value>,
    pub precision: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: ModelSpec,
    pub best_precision: f64,
    pub evaluations: Vec<GridEvaluation>,
}

/// Every combination of the grid applied to `base`, keys in sorted order
/// with the last key varying fastest.
pub fn expand_grid(base: &ModelSpec, grid: &Grid) -> Result<Vec<(BTreeMap<String, Value>, ModelSpec)>> {
    if grid.is_empty() || grid.values().any(Vec::is_empty) {
        return Err(Error::EmptyGrid);
    }
    let base_value = serde_json::to_value(base).map_err(|e| Error::Config(e.to_string()))?;
    for key in grid.keys() {
        if key != "seed" && base_value["hyperparameters"].get(key).is_none() {
            return Err(Error::Config(format!("`{key}` is not a {} hyperparameter", base.family())));
        }
    }
    let keys: Vec<&String> = grid.keys().collect();
    let total: usize = grid.values().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    for mut index in 0..total {
        let mut settings = BTreeMap::new();
        for key in keys.iter().rev() {
            let values = &grid[*key];
            settings.insert((*key).clone(), values[index % values.len()].clone());
            index /= values.len();
        }
        let mut v = base_value.clone();
        for (key, value) in &settings {
            if key == "seed" {
                v["seed"] = value.clone();
            } else {
                v["hyperparameters"][key] = value.clone();
            }
        }
        let spec: ModelSpec = serde_json::from_value(v)
            .map_err(|e| Error::Config(format!("grid combination {settings:?}: {e}")))?;
        spec.validate()?;
        out.push((settings, spec));
    }
    Ok(out)
}

/// Unweighted mean of per-class precision over the classes that occur in
/// either the truth or the predictions; a class never predicted scores 0.
pub fn macro_precision(truth: &[Condition], predicted: &[Condition]) -> f64 {
    let mut tp = [0usize; Condition::COUNT];
    let mut predicted_count = [0usize; Condition::COUNT];
    let mut seen = [false; Condition::COUNT];
    for (t, p) in truth.iter().zip(predicted) {
        predicted_count[p.index()] += 1;
        seen[t.index()] = true;
        seen[p.index()] = true;
        if t == p {
            tp[t.index()] += 1;
        }
    }
    let classes: Vec<usize> = (0..Condition::COUNT).filter(|&c| seen[c]).collect();
    if classes.is_empty() {
        return 0.0;
    }
    classes
        .iter()
        .map(|&c| {
            if predicted_count[c] == 0 {
                0.0
            } else {
                tp[c] as f64 / predicted_count[c] as f64
            }
        })
        .sum::<f64>()
        / classes.len() as f64
}

/// Exhaustive search maximising macro precision on `validation`; the first
/// combination in iteration order wins ties. `on_fit` runs once per fit.
pub fn grid_search(
    base: &ModelSpec,
    grid: &Grid,
    train_set: &Dataset,
    validation: &Dataset,
    mut on_fit: impl FnMut(&ModelSpec),
) -> Result<GridResult> {
    if validation.is_empty() {
        return Err(Error::TrainingData("validation split is empty".into()));
    }
    let truth: Vec<Condition> = validation.samples.iter().map(|s| s.condition).collect();
    let mut best: Option<(f64, ModelSpec)> = None;
    let mut evaluations = Vec::new();
    for (settings, spec) in expand_grid(base, grid)? {
        on_fit(&spec);
        let model = train(&spec, train_set)?;
        let predicted = validation
            .samples
            .iter()
            .map(|s| model.predict_vector(s).map(|p| p.condition))
            .collect::<Result<Vec<_>>>()?;
        let precision = macro_precision(&truth, &predicted);
        if best.as_ref().is_none_or(|(b, _)| precision > *b) {
            best = Some((precision, spec));
        }
        evaluations.push(GridEvaluation { settings, precision });
    }
    let (best_precision, best) = best.ok_or(Error::EmptyGrid)?;
    Ok(GridResult {
        best,
        best_precision,
        evaluations,
    })
}
