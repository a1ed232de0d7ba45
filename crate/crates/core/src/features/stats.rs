use crate::error::{Error, Result};
use crate::series::TimeSeries;

use super::baseline::RepresentativeCurve;
use super::{RATIO_SAMPLE_COUNT, RATIO_SAMPLE_SPAN_SECONDS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub range: f64,
    /// `std / mean`; 0 when the mean is 0 (see `cv_undefined`).
    pub cv: f64,
    pub cv_undefined: bool,
}

/// Mean, population standard deviation, range and coefficient of variation
/// over the valid samples.
pub fn sequence_stats(series: &TimeSeries) -> Result<SequenceStats> {
    let n = series.valid_count();
    if n == 0 {
        return Err(Error::Unrecoverable { valid: 0, required: 1 });
    }
    let nf = n as f64;
    let mean = series.valid_values().sum::<f64>() / nf;
    let var = series.valid_values().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    let std = var.sqrt();
    let (lo, hi) = series
        .valid_values()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let cv_undefined = mean == 0.0;
    Ok(SequenceStats {
        mean,
        std,
        range: hi - lo,
        cv: if cv_undefined { 0.0 } else { std / mean },
        cv_undefined,
    })
}

/// The representative curve's σ divided by the sequence mean. Returns
/// `None` when the sequence mean is 0.
pub fn cv_to_curve(series_mean: f64, curve: &RepresentativeCurve) -> Option<f64> {
    (series_mean != 0.0).then(|| curve.sigma / series_mean)
}

/// The ratio at `t0 + k/3 s` for `k = 0..15`, each read from the nearest
/// valid grid sample (earlier sample on ties).
pub fn ratio_samples(series: &TimeSeries) -> Result<[f64; RATIO_SAMPLE_COUNT]> {
    let duration = series.duration();
    if duration + series.dt * 1e-6 < RATIO_SAMPLE_SPAN_SECONDS {
        return Err(Error::TooShort {
            duration,
            required: RATIO_SAMPLE_SPAN_SECONDS,
        });
    }
    let step = RATIO_SAMPLE_SPAN_SECONDS / RATIO_SAMPLE_COUNT as f64;
    let mut out = [0.0; RATIO_SAMPLE_COUNT];
    for (k, slot) in out.iter_mut().enumerate() {
        let target = ((k as f64 * step) / series.dt).round() as usize;
        let i = nearest_valid(series, target.min(series.len() - 1))
            .ok_or(Error::Unrecoverable { valid: 0, required: 1 })?;
        *slot = series.values[i];
    }
    Ok(out)
}

fn nearest_valid(series: &TimeSeries, target: usize) -> Option<usize> {
    let n = series.len();
    (0..n).find_map(|d| {
        if target >= d && series.mask[target - d] {
            Some(target - d)
        } else if target + d < n && series.mask[target + d] {
            Some(target + d)
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Line3D;
    use crate::model::Condition;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense(values: Vec<f64>) -> TimeSeries {
        TimeSeries::dense(0.0, 1.0 / 15.0, values).unwrap()
    }

    fn curve(sigma: f64) -> RepresentativeCurve {
        let flat = dense(vec![0.4; 3]);
        RepresentativeCurve {
            condition: Condition::Control,
            mean_x: flat.clone(),
            mean_y: flat,
            line: Line3D::new([0.0, 0.4, 0.4], 0.0, 0.0),
            mu: 0.4,
            sigma,
        }
    }

    #[test]
    fn constant_series() {
        let s = sequence_stats(&dense(vec![2.0; 3])).unwrap();
        assert_eq!((s.mean, s.std, s.range, s.cv), (2.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn population_std() {
        let s = sequence_stats(&dense(vec![1.0, 3.0])).unwrap();
        assert_eq!((s.mean, s.std, s.range, s.cv), (2.0, 1.0, 2.0, 0.5));
    }

    #[test]
    fn masked_samples_ignored() {
        let s = TimeSeries::new(0.0, 1.0, vec![1.0, 100.0, 3.0], vec![true, false, true]).unwrap();
        assert_eq!(sequence_stats(&s).unwrap().mean, 2.0);
    }

    #[test]
    fn zero_mean_flags_cv() {
        let s = sequence_stats(&dense(vec![-1.0, 1.0])).unwrap();
        assert!(s.cv_undefined);
        assert_eq!(s.cv, 0.0);
    }

    #[test]
    fn matches_two_pass_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let v: Vec<f64> = (0..1000).map(|_| rng.random_range(0.1..0.9)).collect();
        let s = sequence_stats(&dense(v.clone())).unwrap();
        let mut mean = 0.0;
        for x in &v {
            mean += x;
        }
        mean /= 1000.0;
        let mut ss = 0.0;
        for x in &v {
            ss += (x - mean) * (x - mean);
        }
        let std = (ss / 1000.0).sqrt();
        assert!((s.mean - mean).abs() < 1e-9 && (s.std - std).abs() < 1e-9);
        assert!((s.cv - std / mean).abs() < 1e-9);
    }

    #[test]
    fn curve_cv() {
        assert!((cv_to_curve(0.5, &curve(0.05)).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(cv_to_curve(0.37, &curve(0.0)), Some(0.0));
        assert_eq!(cv_to_curve(0.0, &curve(0.05)), None);
        let sigmas = [0.01, 0.02, 0.03, 0.04];
        let cvs: Vec<f64> = sigmas.iter().map(|&s| cv_to_curve(0.25, &curve(s)).unwrap()).collect();
        for (cv, s) in cvs.iter().zip(sigmas) {
            assert!((cv / s - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn samples_of_constant_and_linear_series() {
        assert_eq!(ratio_samples(&dense(vec![0.4; 150])).unwrap(), [0.4; 15]);
        let lin = dense((0..150).map(|i| i as f64 / 15.0).collect());
        let got = ratio_samples(&lin).unwrap();
        for (k, v) in got.iter().enumerate() {
            assert!((v - k as f64 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn samples_are_every_fifth_grid_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let v: Vec<f64> = (0..150).map(|_| rng.random()).collect();
        let got = ratio_samples(&dense(v.clone())).unwrap();
        for k in 0..15 {
            assert_eq!(got[k], v[5 * k]);
        }
    }

    #[test]
    fn samples_fall_back_to_nearest_valid() {
        let mut mask = vec![true; 150];
        mask[10] = false;
        mask[9] = false;
        let v: Vec<f64> = (0..150).map(|i| i as f64).collect();
        let s = TimeSeries::new(0.0, 1.0 / 15.0, v, mask).unwrap();
        assert_eq!(ratio_samples(&s).unwrap()[2], 11.0);
    }

    #[test]
    fn samples_need_five_seconds() {
        assert!(matches!(ratio_samples(&dense(vec![0.4; 60])), Err(Error::TooShort { .. })));
    }
}
