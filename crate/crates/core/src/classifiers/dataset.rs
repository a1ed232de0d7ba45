use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{read_feature_vectors, FeatureVector, FEATURE_LEN};
use crate::model::Condition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Labelled feature vectors of one split.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub split: Split,
    pub samples: Vec<FeatureVector>,
}

impl Dataset {
    pub fn new(split: Split, samples: Vec<FeatureVector>) -> Self {
        Dataset { split, samples }
    }

    pub fn load(path: impl AsRef<Path>, split: Split) -> Result<Self> {
        Ok(Dataset::new(split, read_feature_vectors(path)?))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Feature rows and class indices.
    pub fn matrix(&self) -> (Vec<Vec<f64>>, Vec<usize>) {
        self.samples
            .iter()
            .map(|s| (s.features().to_vec(), s.condition.index()))
            .unzip()
    }

    pub fn class_counts(&self) -> [usize; Condition::COUNT] {
        let mut c = [0; Condition::COUNT];
        for s in &self.samples {
            c[s.condition.index()] += 1;
        }
        c
    }
}

/// Validates a single input row for prediction.
pub(crate) fn check_row(x: &[f64]) -> Result<()> {
    if x.len() != FEATURE_LEN {
        return Err(Error::LengthMismatch {
            expected: FEATURE_LEN,
            actual: x.len(),
        });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("input feature {i}")));
    }
    Ok(())
}
