use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::Line3D;
use super::trend::linear_trend;
use crate::error::{Error, Result};
use crate::model::{Axis, Condition, EyeSequence};
use crate::series::{grand_mean, Preprocessing, TimeSeries};

/// Grand-mean ratio curves of one condition and their regression line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeCurve {
    pub condition: Condition,
    pub mean_x: TimeSeries,
    pub mean_y: TimeSeries,
    pub line: Line3D,
    /// Mean of the valid `mean_x` values.
    pub mu: f64,
    /// Population standard deviation of the valid `mean_x` values.
    pub sigma: f64,
}

/// Line through `(0, b_x, b_y)` with direction `(1, m_x, m_y)` from the
/// per-axis trends of a pair of curves.
pub fn representative_line(mean_x: &TimeSeries, mean_y: &TimeSeries) -> Result<Line3D> {
    if mean_x.len() != mean_y.len() {
        return Err(Error::SeriesMismatch(format!(
            "x curve has {} samples, y curve {}",
            mean_x.len(),
            mean_y.len()
        )));
    }
    let tx = linear_trend(mean_x)?;
    let ty = linear_trend(mean_y)?;
    Ok(Line3D::new([0.0, tx.b, ty.b], tx.m, ty.m))
}

impl RepresentativeCurve {
    pub fn from_curves(condition: Condition, mean_x: TimeSeries, mean_y: TimeSeries) -> Result<Self> {
        let line = representative_line(&mean_x, &mean_y)?;
        let n = mean_x.valid_count() as f64;
        let mu = mean_x.valid_values().sum::<f64>() / n;
        let sigma = (mean_x.valid_values().map(|v| (v - mu).powi(2)).sum::<f64>() / n).sqrt();
        Ok(RepresentativeCurve {
            condition,
            mean_x,
            mean_y,
            line,
            mu,
            sigma,
        })
    }
}

pub const BASELINES_FORMAT_VERSION: u32 = 1;

/// One representative curve per condition, in class order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    pub format_version: u32,
    pub curves: Vec<RepresentativeCurve>,
    /// Number of sequences that contributed to each curve.
    pub support: Vec<usize>,
}

impl Baselines {
    pub fn new(curves: Vec<RepresentativeCurve>, support: Vec<usize>) -> Result<Self> {
        let b = Baselines {
            format_version: BASELINES_FORMAT_VERSION,
            curves,
            support,
        };
        b.validate()?;
        Ok(b)
    }

    fn validate(&self) -> Result<()> {
        if self.format_version != BASELINES_FORMAT_VERSION {
            return Err(Error::ModelVersion(self.format_version));
        }
        let ordered = self.curves.len() == Condition::COUNT
            && self
                .curves
                .iter()
                .zip(Condition::ALL)
                .all(|(c, want)| c.condition == want);
        if !ordered {
            return Err(Error::Config(
                "baselines must hold one curve per condition in the order control, alcohol, drug, sleep".into(),
            ));
        }
        Ok(())
    }

    pub fn curve(&self, condition: Condition) -> &RepresentativeCurve {
        &self.curves[condition.index()]
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::save_json(path, self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingInput {
                path: path.to_path_buf(),
                hint: "baseline curves are required; run `ffd baseline` on the training split first".into(),
            });
        }
        let b: Baselines = crate::io::load_json(path)?;
        b.validate()?;
        Ok(b)
    }
}

/// Grand-mean ratio curves per condition over the given (training)
/// sequences. Sequences that fail preprocessing are left out; every
/// condition needs at least one usable sequence.
pub fn build_baselines(sequences: &[EyeSequence], prep: &Preprocessing) -> Result<Baselines> {
    let processed: Vec<Option<(Condition, TimeSeries, TimeSeries)>> = sequences
        .par_iter()
        .map(|seq| {
            let x = prep.ratio(seq, Axis::X).ok()?;
            let y = prep.ratio(seq, Axis::Y).ok()?;
            Some((seq.condition, x, y))
        })
        .collect();
    let mut curves = Vec::with_capacity(Condition::COUNT);
    let mut support = Vec::with_capacity(Condition::COUNT);
    for condition in Condition::ALL {
        let (xs, ys): (Vec<_>, Vec<_>) = processed
            .iter()
            .flatten()
            .filter(|(c, _, _)| *c == condition)
            .map(|(_, x, y)| (x, y))
            .unzip();
        if xs.is_empty() {
            return Err(Error::TrainingData(format!(
                "no usable {condition} sequences to build a baseline curve"
            )));
        }
        let mean_x = grand_mean(&xs)?;
        let mean_y = grand_mean(&ys)?;
        curves.push(RepresentativeCurve::from_curves(condition, mean_x, mean_y)?);
        support.push(xs.len());
    }
    Baselines::new(curves, support)
}
