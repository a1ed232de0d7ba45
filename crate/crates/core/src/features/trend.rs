use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// `value ≈ m · t + b`, with `t` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendLine {
    pub m: f64,
    pub b: f64,
}

/// Ordinary least squares over the valid samples,
///
/// ```text
/// m = (n·Σxy − Σx·Σy) / (n·Σx² − (Σx)²)
/// b = (Σy·Σx² − Σx·Σxy) / (n·Σx² − (Σx)²)
/// ```
///
/// evaluated about the sample means so a late window start does not
/// cancel away the digits of the time spread.
pub fn linear_trend(series: &TimeSeries) -> Result<TrendLine> {
    trend_of_points(series.valid_points())
}

fn trend_of_points(points: impl Iterator<Item = (f64, f64)>) -> Result<TrendLine> {
    let pts: Vec<(f64, f64)> = points.collect();
    let n = pts.len();
    if n < 2 {
        return Err(Error::SparseWindow {
            window: "trend",
            valid: n,
        });
    }
    let (xmin, xmax) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| (lo.min(x), hi.max(x)));
    if xmin == xmax {
        return Err(Error::DegenerateTrend);
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |(sxx, sxy), &(x, y)| {
        let dx = x - mx;
        (sxx + dx * dx, sxy + dx * (y - my))
    });
    if !(sxx > 0.0) {
        return Err(Error::DegenerateTrend);
    }
    let m = sxy / sxx;
    Ok(TrendLine { m, b: my - m * mx })
}

/// Indices of samples with `start <= t < start + width`, with a small
/// tolerance so that grid times computed in floating point land in the
/// intended window.
fn window_indices(series: &TimeSeries, start: f64, width: f64) -> std::ops::Range<usize> {
    let eps = series.dt * 1e-6;
    let lo = ((start - series.t0 - eps) / series.dt).ceil().max(0.0) as usize;
    let hi = ((start + width - series.t0 - eps) / series.dt).ceil().max(0.0) as usize;
    lo.min(series.len())..hi.min(series.len())
}

fn window_points(
    series: &TimeSeries,
    range: std::ops::Range<usize>,
) -> impl Iterator<Item = (f64, f64)> + '_ {
    range
        .filter(|&i| series.mask[i])
        .map(|i| (series.time(i), series.values[i]))
}

/// Trend over the first second, `[t0, t0 + 1 s)`.
pub fn starting_trend(series: &TimeSeries) -> Result<TrendLine> {
    let range = window_indices(series, series.t0, super::WINDOW_SECONDS);
    let valid = range.clone().filter(|&i| series.mask[i]).count();
    if valid < 2 {
        return Err(Error::SparseWindow {
            window: "first second",
            valid,
        });
    }
    trend_of_points(window_points(series, range))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovingTrend {
    pub slopes: Vec<f64>,
    /// Windows with fewer than two valid samples; their slope is 0.
    pub sparse_windows: usize,
}

/// Slopes over rectangular windows of `window` seconds started every `hop`
/// seconds, for as long as a window fits inside the sequence.
pub fn moving_trend(series: &TimeSeries, window: f64, hop: f64) -> Result<MovingTrend> {
    if !(window > 0.0 && hop > 0.0) {
        return Err(Error::Config(format!("window {window} s / hop {hop} s must be positive")));
    }
    let duration = series.duration();
    let eps = series.dt * 1e-6;
    if duration + eps < window {
        return Err(Error::TooShort {
            duration,
            required: window,
        });
    }
    let count = ((duration - window + eps) / hop).floor() as usize + 1;
    let mut slopes = Vec::with_capacity(count);
    let mut sparse_windows = 0;
    for k in 0..count {
        let start = series.t0 + k as f64 * hop;
        let range = window_indices(series, start, window);
        let valid = range.clone().filter(|&i| series.mask[i]).count();
        if valid < 2 {
            sparse_windows += 1;
            slopes.push(0.0);
            continue;
        }
        slopes.push(trend_of_points(window_points(series, range))?.m);
    }
    Ok(MovingTrend {
        slopes,
        sparse_windows,
    })
}
