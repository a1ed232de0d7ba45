use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::baseline::Baselines;
use super::geometry::{skew_distance, Line3D};
use super::stats::{cv_to_curve, ratio_samples, sequence_stats};
use super::trend::{linear_trend, moving_trend, starting_trend};
use super::*;
use crate::error::{Error, Result};
use crate::model::{Axis, Condition, EyeSequence};
use crate::series::Preprocessing;

/// The 50 behavioural features of one sequence (or one fused pair of eyes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFeatureVector")]
pub struct FeatureVector {
    pub id: String,
    pub condition: Condition,
    features: Vec<f64>,
}

#[derive(Deserialize)]
struct RawFeatureVector {
    id: String,
    condition: Condition,
    features: Vec<f64>,
}

impl TryFrom<RawFeatureVector> for FeatureVector {
    type Error = Error;

    fn try_from(raw: RawFeatureVector) -> Result<Self> {
        FeatureVector::new(raw.id, raw.condition, raw.features)
    }
}

impl FeatureVector {
    pub fn new(id: impl Into<String>, condition: Condition, features: Vec<f64>) -> Result<Self> {
        if features.len() != FEATURE_LEN {
            return Err(Error::LengthMismatch {
                expected: FEATURE_LEN,
                actual: features.len(),
            });
        }
        let id = id.into();
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("input feature {i} of {id}")));
        }
        Ok(FeatureVector {
            id,
            condition,
            features,
        })
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn into_features(self) -> Vec<f64> {
        self.features
    }
}

/// Non-fatal events during extraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// Moving-trend windows with fewer than two valid samples.
    pub sparse_windows: usize,
    /// Set when the sequence mean is 0 and every CV slot was written as 0.
    pub undefined_cv: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EyeFusion {
    /// One vector per capture id, averaging the eyes element-wise.
    #[default]
    Average,
    /// One vector per `(id, eye)`, identified as `id/eye`.
    PerEye,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionOptions {
    #[serde(flatten)]
    pub preprocessing: Preprocessing,
    pub eye_fusion: EyeFusion,
}

/// Builds the feature vector of one eye sequence together with extraction
/// diagnostics. Any failure makes the whole sequence unusable.
pub fn extract_features(
    seq: &EyeSequence,
    baselines: &Baselines,
    prep: &Preprocessing,
) -> Result<(FeatureVector, Diagnostics)> {
    let x = prep.ratio(seq, Axis::X)?;
    let y = prep.ratio(seq, Axis::Y)?;

    let mut features = Vec::with_capacity(FEATURE_LEN);
    let mut diagnostics = Diagnostics::default();

    let trend = linear_trend(&x)?;
    features.extend([trend.m, trend.b]);

    let start = starting_trend(&x)?;
    features.extend([start.m, start.b]);

    let moving = moving_trend(&x, WINDOW_SECONDS, HOP_SECONDS)?;
    if moving.slopes.len() != MOVING_TREND.len() {
        return Err(Error::TooShort {
            duration: x.duration(),
            required: WINDOW_SECONDS + HOP_SECONDS * (MOVING_TREND.len() - 1) as f64,
        });
    }
    diagnostics.sparse_windows = moving.sparse_windows;
    features.extend(&moving.slopes);

    let trend_y = linear_trend(&y)?;
    let own = Line3D::new([0.0, trend.b, trend_y.b], trend.m, trend_y.m);
    features.extend(baselines.curves.iter().map(|c| skew_distance(&own, &c.line)));

    let stats = sequence_stats(&x)?;
    diagnostics.undefined_cv = stats.cv_undefined;
    features.extend([stats.mean, stats.std, stats.range, stats.cv]);
    features.extend(
        baselines
            .curves
            .iter()
            .map(|c| cv_to_curve(stats.mean, c).unwrap_or(0.0)),
    );

    features.extend(ratio_samples(&x)?);

    debug_assert_eq!(features.len(), FEATURE_LEN);
    let vector = FeatureVector::new(seq.id.clone(), seq.condition, features)?;
    Ok((vector, diagnostics))
}

pub fn build_feature_vector(
    seq: &EyeSequence,
    baselines: &Baselines,
    prep: &Preprocessing,
) -> Result<FeatureVector> {
    extract_features(seq, baselines, prep).map(|(v, _)| v)
}

#[derive(Debug)]
pub struct SkippedSequence {
    pub id: String,
    pub eye: crate::model::Eye,
    pub reason: Error,
}

/// Feature vectors for a batch of sequences, in first-seen id order.
/// Sequences that cannot be processed are reported rather than aborting the
/// batch; with [`EyeFusion::Average`] an id survives if any eye does.
pub fn extract_dataset(
    sequences: &[EyeSequence],
    baselines: &Baselines,
    options: &ExtractionOptions,
) -> (Vec<FeatureVector>, Vec<SkippedSequence>) {
    let results: Vec<Result<FeatureVector>> = sequences
        .par_iter()
        .map(|seq| build_feature_vector(seq, baselines, &options.preprocessing))
        .collect();

    let mut skipped = Vec::new();
    let mut per_id: Vec<(String, Condition, Vec<Vec<f64>>)> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();
    for (seq, result) in sequences.iter().zip(results) {
        let vector = match result {
            Ok(v) => v,
            Err(reason) => {
                skipped.push(SkippedSequence {
                    id: seq.id.clone(),
                    eye: seq.eye,
                    reason,
                });
                continue;
            }
        };
        let key = match options.eye_fusion {
            EyeFusion::Average => seq.id.clone(),
            EyeFusion::PerEye => format!("{}/{}", seq.id, seq.eye),
        };
        let idx = *slot.entry(key.clone()).or_insert_with(|| {
            per_id.push((key, seq.condition, Vec::new()));
            per_id.len() - 1
        });
        per_id[idx].2.push(vector.into_features());
    }

    let vectors = per_id
        .into_iter()
        .filter_map(|(id, condition, eyes)| {
            let n = eyes.len() as f64;
            let mut fused = vec![0.0; FEATURE_LEN];
            for eye in &eyes {
                for (acc, v) in fused.iter_mut().zip(eye) {
                    *acc += v;
                }
            }
            if eyes.len() > 1 {
                fused.iter_mut().for_each(|v| *v /= n);
            }
            FeatureVector::new(id, condition, fused).ok()
        })
        .collect();
    (vectors, skipped)
}

/// Writes one JSON record per line.
pub fn write_feature_vectors(path: impl AsRef<Path>, vectors: &[FeatureVector]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for v in vectors {
        serde_json::to_writer(&mut w, v).map_err(|e| Error::json(path, e))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_feature_vectors(path: impl AsRef<Path>) -> Result<Vec<FeatureVector>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: FeatureVector = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i as u64 + 1,
            message: e.to_string(),
        })?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::Empty(path.display().to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRange {
    pub name: String,
    pub start: usize,
    pub end: usize,
    pub description: String,
}

/// Named slot ranges of the feature vector, written next to feature files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub length: usize,
    pub signal: String,
    pub slots: Vec<SlotRange>,
}

impl FeatureLayout {
    pub fn standard() -> Self {
        let slot = |name: &str, r: std::ops::Range<usize>, description: &str| SlotRange {
            name: name.into(),
            start: r.start,
            end: r.end,
            description: description.into(),
        };
        let per_condition = Condition::ALL.map(|c| c.as_str()).join(", ");
        FeatureLayout {
            length: FEATURE_LEN,
            signal: "x-axis pupil/iris radius ratio".into(),
            slots: vec![
                slot("trend", TREND, "least-squares slope m (1/s) and intercept b over the whole sequence"),
                slot("starting_trend", STARTING_TREND, "slope and intercept over the first second"),
                slot("moving_trend", MOVING_TREND, "slopes over 1 s windows every 0.5 s"),
                slot(
                    "curve_distance",
                    DISTANCES,
                    &format!("skew-line distance from the sequence's (t, x, y) trend line to the {per_condition} lines"),
                ),
                slot("statistics", STATISTICS, "mean, population std, range, coefficient of variation"),
                slot(
                    "cv_to_curve",
                    CV_TO_CURVES,
                    &format!("representative-curve sigma over sequence mean for {per_condition}"),
                ),
                slot("ratio_samples", RATIO_SAMPLES, "ratio at t = 0, 1/3, ..., 14/3 s"),
            ],
        }
    }
}
