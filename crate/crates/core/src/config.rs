//! Single-file pipeline configuration with one section per stage.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::{BoostingParams, Family, ForestParams, Grid, Hyperparameters, MlpParams, ModelSpec};
use crate::error::{Error, Result};
use crate::features::ExtractionOptions;
use crate::synth::GeneratorConfig;

/// The shipped default configuration, identical to [`PipelineConfig::default`].
pub const DEFAULT_CONFIG_JSON: &str = include_str!("../configs/default.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Sequence CSVs and feature files, one per split.
    pub data: PathBuf,
    /// Label masks and their manifest.
    pub masks: PathBuf,
    /// Baselines and trained models.
    pub models: PathBuf,
    /// Reports and plot data.
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            data: "data".into(),
            masks: "data/masks".into(),
            models: "models".into(),
            out: "out".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfigs {
    pub random_forest: ForestParams,
    pub gradient_boosting: BoostingParams,
    pub mlp: MlpParams,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Seeds the generator and every model; `--seed` overrides it.
    pub seed: u64,
    pub paths: Paths,
    pub extraction: ExtractionOptions,
    pub models: ModelConfigs,
    /// Hyperparameter grids per family name, used by `train --search`.
    pub grids: BTreeMap<Family, Grid>,
    /// The generator's own `seed` field is replaced by the top-level seed.
    pub generator: GeneratorConfig,
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingInput {
                path: path.to_path_buf(),
                hint: "pass an existing JSON file to --config".into(),
            });
        }
        let cfg: PipelineConfig = crate::io::load_json(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for family in Family::ALL {
            self.spec(family).validate()?;
        }
        self.generator().geometry()?;
        let p = &self.extraction.preprocessing;
        if p.target_len < 2 || !(0.0..=1.0).contains(&p.max_invalid_fraction) {
            return Err(Error::Config(format!(
                "extraction: target_len must be at least 2 and max_invalid_fraction within [0, 1], got {} and {}",
                p.target_len, p.max_invalid_fraction
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn spec(&self, family: Family) -> ModelSpec {
        let hyperparameters = match family {
            Family::RandomForest => Hyperparameters::RandomForest(self.models.random_forest.clone()),
            Family::GradientBoosting => Hyperparameters::GradientBoosting(self.models.gradient_boosting.clone()),
            Family::Mlp => Hyperparameters::Mlp(self.models.mlp.clone()),
        };
        ModelSpec {
            hyperparameters,
            seed: self.seed,
        }
    }

    pub fn generator(&self) -> GeneratorConfig {
        GeneratorConfig {
            seed: self.seed,
            ..self.generator.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_file_is_the_default() {
        let parsed: PipelineConfig = serde_json::from_str(DEFAULT_CONFIG_JSON).unwrap();
        assert_eq!(parsed, PipelineConfig::default());
        parsed.validate().unwrap();
    }

    #[test]
    fn empty_object_is_default() {
        let parsed: PipelineConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(parsed, PipelineConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"sed": 1}"#).is_err());
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"extraction": {"target_length": 10}}"#).is_err());
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"models": {"mlp": {"alhpa": 1}}}"#).is_err());
    }

    #[test]
    fn partial_sections_keep_other_defaults() {
        let cfg: PipelineConfig =
            serde_json::from_str(r#"{"seed": 9, "extraction": {"eye_fusion": "per_eye", "max_gap": 3}}"#).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.extraction.preprocessing.max_gap, 3);
        assert_eq!(cfg.extraction.preprocessing.target_len, 150);
        assert_eq!(cfg.generator().seed, 9);
        assert_eq!(cfg.spec(Family::Mlp).seed, 9);
    }

    #[test]
    fn grids_parse_per_family() {
        let cfg: PipelineConfig =
            serde_json::from_str(r#"{"grids": {"random_forest": {"max_depth": [3, 5]}}}"#).unwrap();
        assert_eq!(cfg.grids[&Family::RandomForest]["max_depth"].len(), 2);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"grids": {"svm": {}}}"#).is_err());
    }
}
