//! Uniformly sampled, masked time series and the preprocessing applied to
//! every eye sequence before analysis: pupil-iris ratio, blink-gap filling,
//! resampling onto a canonical grid and per-time-index grand means.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Axis, EyeSequence, FrameGeometry};

pub const CANONICAL_FPS: f64 = 15.0;
pub const CANONICAL_LEN: usize = 150;
pub const DEFAULT_MAX_GAP: usize = 7;
pub const DEFAULT_MAX_INVALID_FRACTION: f64 = 0.30;

/// Samples at `t0 + i * dt`. Samples whose mask is false carry the value 0
/// and must not be read by consumers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if values.len() != mask.len() {
            return Err(Error::SeriesMismatch(format!(
                "{} values but {} mask entries",
                values.len(),
                mask.len()
            )));
        }
        if !(dt > 0.0) {
            return Err(Error::SeriesMismatch(format!("sample spacing {dt} is not positive")));
        }
        let values = values
            .into_iter()
            .zip(&mask)
            .map(|(v, &ok)| if ok { v } else { 0.0 })
            .collect();
        Ok(TimeSeries {
            t0,
            dt,
            values,
            mask,
        })
    }

    /// A series with every sample valid.
    pub fn dense(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        let mask = vec![true; values.len()];
        Self::new(t0, dt, values, mask)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Total covered time, each sample spanning one `dt`.
    pub fn duration(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn invalid_fraction(&self) -> f64 {
        if self.is_empty() {
            return 1.0;
        }
        1.0 - self.valid_count() as f64 / self.len() as f64
    }

    /// `(time, value)` for every valid sample.
    pub fn valid_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .zip(&self.mask)
            .enumerate()
            .filter(|(_, (_, &m))| m)
            .map(|(i, (&v, _))| (self.time(i), v))
    }

    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|(&v, _)| v)
    }
}

/// Builds a series from one per-frame quantity of a sequence. `valid` decides
/// the mask of each frame.
pub fn frame_series(
    seq: &EyeSequence,
    value: impl Fn(&FrameGeometry) -> f64,
    valid: impl Fn(&FrameGeometry) -> bool,
) -> Result<TimeSeries> {
    if seq.frames.is_empty() {
        return Err(Error::Empty(format!("sequence {}", seq.id)));
    }
    let t0 = seq.frames[0].t;
    let (values, mask) = seq
        .frames
        .iter()
        .map(|f| {
            let ok = valid(f);
            (if ok { value(f) } else { 0.0 }, ok)
        })
        .unzip();
    TimeSeries::new(t0, 1.0 / seq.fps, values, mask)
}

/// Pupil radius over iris radius along one axis. Frames that are flagged
/// invalid or have no iris become masked samples.
pub fn ratio_series(seq: &EyeSequence, axis: Axis) -> Result<TimeSeries> {
    frame_series(
        seq,
        |f| f.pupil_r(axis) / f.iris_r(axis),
        |f| f.valid && f.iris_r(axis) > 0.0,
    )
}

/// Fills runs of invalid samples no longer than `max_gap`. Interior runs are
/// interpolated linearly between their valid neighbours; runs touching either
/// end are filled with the nearest valid value.
pub fn interpolate_gaps(series: &TimeSeries, max_gap: usize) -> Result<TimeSeries> {
    let valid = series.valid_count();
    if valid < 2 {
        return Err(Error::Unrecoverable { valid, required: 2 });
    }
    let mut out = series.clone();
    let n = series.len();
    let mut i = 0;
    while i < n {
        if series.mask[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && !series.mask[i] {
            i += 1;
        }
        let end = i; // exclusive
        if end - start > max_gap {
            continue;
        }
        match (start.checked_sub(1), (end < n).then_some(end)) {
            (Some(left), Some(right)) => {
                let (a, b) = (series.values[left], series.values[right]);
                let span = (right - left) as f64;
                for k in start..end {
                    let w = (k - left) as f64 / span;
                    out.values[k] = a + (b - a) * w;
                    out.mask[k] = true;
                }
            }
            (Some(edge), None) | (None, Some(edge)) => {
                for k in start..end {
                    out.values[k] = series.values[edge];
                    out.mask[k] = true;
                }
            }
            (None, None) => unreachable!("series has valid samples"),
        }
    }
    Ok(out)
}

/// Linear interpolation onto `target_len` uniformly spaced samples covering
/// the same span `[t0, t0 + (len - 1) * dt]`. An output sample is valid when
/// every input sample it interpolates between is valid.
pub fn resample(series: &TimeSeries, target_len: usize) -> Result<TimeSeries> {
    let valid = series.valid_count();
    if valid < 2 {
        return Err(Error::Unrecoverable { valid, required: 2 });
    }
    if target_len < 2 {
        return Err(Error::Config(format!("resample length {target_len} is below 2")));
    }
    let n = series.len();
    let last = (n - 1) as f64;
    let step = last / (target_len - 1) as f64;
    let mut values = Vec::with_capacity(target_len);
    let mut mask = Vec::with_capacity(target_len);
    for k in 0..target_len {
        let pos = if k == target_len - 1 {
            last
        } else {
            k as f64 * last / (target_len - 1) as f64
        };
        let i = (pos.floor() as usize).min(n - 1);
        let w = pos - i as f64;
        if w == 0.0 || i == n - 1 {
            values.push(series.values[i]);
            mask.push(series.mask[i]);
        } else {
            let ok = series.mask[i] && series.mask[i + 1];
            let (a, b) = (series.values[i], series.values[i + 1]);
            values.push(if ok { a + (b - a) * w } else { 0.0 });
            mask.push(ok);
        }
    }
    TimeSeries::new(series.t0, series.dt * step, values, mask)
}

/// Per-time-index mean over the series whose sample is valid at that index.
/// Contributing values are summed in sorted order, so the result does not
/// depend on the order of `series_list`.
pub fn grand_mean<S: AsRef<TimeSeries>>(series_list: &[S]) -> Result<TimeSeries> {
    let first = series_list
        .first()
        .ok_or_else(|| Error::Empty("grand mean input".into()))?
        .as_ref();
    for s in series_list.iter().map(AsRef::as_ref) {
        if s.len() != first.len() {
            return Err(Error::SeriesMismatch(format!(
                "grand mean over series of lengths {} and {}",
                first.len(),
                s.len()
            )));
        }
        if (s.dt - first.dt).abs() > 1e-9 * first.dt.abs() {
            return Err(Error::SeriesMismatch(format!(
                "grand mean over spacings {} and {}",
                first.dt, s.dt
            )));
        }
    }
    let mut values = Vec::with_capacity(first.len());
    let mut mask = Vec::with_capacity(first.len());
    let mut column = Vec::with_capacity(series_list.len());
    for i in 0..first.len() {
        column.clear();
        column.extend(
            series_list
                .iter()
                .map(AsRef::as_ref)
                .filter(|s| s.mask[i])
                .map(|s| s.values[i]),
        );
        if column.is_empty() {
            values.push(0.0);
            mask.push(false);
        } else {
            column.sort_by(f64::total_cmp);
            values.push(column.iter().sum::<f64>() / column.len() as f64);
            mask.push(true);
        }
    }
    TimeSeries::new(first.t0, first.dt, values, mask)
}

impl AsRef<TimeSeries> for TimeSeries {
    fn as_ref(&self) -> &TimeSeries {
        self
    }
}

/// Settings for turning a raw per-frame series into an analysis-ready one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Preprocessing {
    pub target_len: usize,
    pub max_gap: usize,
    pub max_invalid_fraction: f64,
}

impl Default for Preprocessing {
    fn default() -> Self {
        Preprocessing {
            target_len: CANONICAL_LEN,
            max_gap: DEFAULT_MAX_GAP,
            max_invalid_fraction: DEFAULT_MAX_INVALID_FRACTION,
        }
    }
}

impl Preprocessing {
    /// Gap filling, rejection of mostly-missing series, resampling, and a
    /// shift of the time origin to zero.
    pub fn apply(&self, raw: &TimeSeries) -> Result<TimeSeries> {
        let filled = interpolate_gaps(raw, self.max_gap)?;
        let invalid_fraction = filled.invalid_fraction();
        if invalid_fraction > self.max_invalid_fraction {
            return Err(Error::TooManyGaps {
                invalid_fraction,
                limit: self.max_invalid_fraction,
            });
        }
        let mut out = resample(&filled, self.target_len)?;
        out.t0 = 0.0;
        Ok(out)
    }

    pub fn ratio(&self, seq: &EyeSequence, axis: Axis) -> Result<TimeSeries> {
        self.apply(&ratio_series(seq, axis)?)
    }
}
