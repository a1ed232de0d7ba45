use nalgebra::{Matrix3, Vector3};

use super::{CircleEstimate, Point};
use crate::error::{Error, Result};

/// Normal equations whose smallest/largest eigenvalue ratio falls below this
/// are treated as singular.
const MIN_CONDITION: f64 = 1e-10;

/// Algebraic (Kåsa) circle fit: minimises `Σ (x² + y² + D·x + E·y + F)²`
/// over `(D, E, F)` and recovers centre `(-D/2, -E/2)` and radius
/// `sqrt(cx² + cy² - F)`.
///
/// Points are centred on their mean and scaled to unit RMS distance before
/// solving, which makes the result translation-equivariant and keeps the
/// normal equations well conditioned for large pixel coordinates.
pub fn fit_circle_lsq(points: &[Point]) -> Result<CircleEstimate> {
    let n = points.len();
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let scale = (points
        .iter()
        .map(|p| (p.0 - mx).powi(2) + (p.1 - my).powi(2))
        .sum::<f64>()
        / nf)
        .sqrt();
    if !(scale > 0.0) {
        return Err(Error::Collinear(0.0));
    }

    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for p in points {
        let u = (p.0 - mx) / scale;
        let v = (p.1 - my) / scale;
        let row = Vector3::new(u, v, 1.0);
        normal += row * row.transpose();
        rhs -= row * (u * u + v * v);
    }

    let eig = normal.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    let condition = if hi > 0.0 { lo / hi } else { 0.0 };
    if condition < MIN_CONDITION {
        return Err(Error::Collinear(condition));
    }
    let coeffs = normal.lu().solve(&rhs).ok_or(Error::Collinear(condition))?;
    let (uc, vc) = (-coeffs[0] / 2.0, -coeffs[1] / 2.0);
    let r2 = uc * uc + vc * vc - coeffs[2];
    if !(r2 > 0.0) {
        return Err(Error::Collinear(condition));
    }

    let cx = mx + scale * uc;
    let cy = my + scale * vc;
    let r = scale * r2.sqrt();
    let rms_error = (points
        .iter()
        .map(|p| ((p.0 - cx).hypot(p.1 - cy) - r).powi(2))
        .sum::<f64>()
        / nf)
        .sqrt();
    Ok(CircleEstimate {
        cx,
        cy,
        r,
        rms_error,
        n_points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn circle_points(cx: f64, cy: f64, r: f64, n: usize, phase: f64) -> Vec<Point> {
        (0..n)
            .map(|i| {
                let a = phase + 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                (cx + r * a.cos(), cy + r * a.sin())
            })
            .collect()
    }

    /// Geometric fit oracle: Gauss-Newton on Σ(|p - c| - r)².
    fn geometric_fit(points: &[Point]) -> (f64, f64, f64) {
        let n = points.len() as f64;
        let mut cx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let mut cy = points.iter().map(|p| p.1).sum::<f64>() / n;
        let mut r = points.iter().map(|p| (p.0 - cx).hypot(p.1 - cy)).sum::<f64>() / n;
        for _ in 0..100 {
            let mut jtj = Matrix3::<f64>::zeros();
            let mut jtr = Vector3::<f64>::zeros();
            for p in points {
                let d = (p.0 - cx).hypot(p.1 - cy);
                let j = Vector3::new(-(p.0 - cx) / d, -(p.1 - cy) / d, -1.0);
                let res = d - r;
                jtj += j * j.transpose();
                jtr += j * res;
            }
            let step = jtj.lu().solve(&(-jtr)).unwrap();
            cx += step[0];
            cy += step[1];
            r += step[2];
            if step.norm() < 1e-14 {
                break;
            }
        }
        (cx, cy, r)
    }

    #[test]
    fn exact_eight_points() {
        let fit = fit_circle_lsq(&circle_points(10.0, 10.0, 5.0, 8, 0.3)).unwrap();
        assert!((fit.cx - 10.0).abs() < 1e-9);
        assert!((fit.cy - 10.0).abs() < 1e-9);
        assert!((fit.r - 5.0).abs() < 1e-9);
        assert!(fit.rms_error < 1e-9);
        assert_eq!(fit.n_points, 8);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            fit_circle_lsq(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]),
            Err(Error::Collinear(_))
        ));
        assert!(matches!(fit_circle_lsq(&[(0.0, 0.0), (1.0, 1.0)]), Err(Error::TooFewPoints(2))));
        assert!(fit_circle_lsq(&[(3.0, 3.0); 5]).is_err());
    }

    #[test]
    fn noisy_circle_matches_geometric_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let points: Vec<Point> = (0..200)
            .map(|_| {
                let a = rng.random_range(0.0..std::f64::consts::TAU);
                (
                    32.0 + 12.0 * a.cos() + noise.sample(&mut rng),
                    32.0 + 12.0 * a.sin() + noise.sample(&mut rng),
                )
            })
            .collect();
        let fit = fit_circle_lsq(&points).unwrap();
        let (gx, gy, gr) = geometric_fit(&points);
        assert!((fit.r - 12.0).abs() <= 0.5, "r = {}", fit.r);
        assert!((gr - 12.0).abs() <= 0.5);
        assert!((fit.r - gr).abs() < 0.1, "{} vs {gr}", fit.r);
        assert!((fit.cx - gx).abs() < 0.1 && (fit.cy - gy).abs() < 0.1);
        assert!(fit.rms_error > 0.2 && fit.rms_error < 1.0);
    }

    proptest! {
        #[test]
        fn translation_equivariant(
            cx in -50.0f64..50.0, cy in -50.0f64..50.0, r in 1.0f64..40.0,
            dx in -500.0f64..500.0, dy in -500.0f64..500.0,
            jitter in prop::collection::vec(-0.3f64..0.3, 24),
        ) {
            let pts: Vec<Point> = circle_points(cx, cy, r, 12, 0.1)
                .into_iter()
                .zip(jitter.chunks(2))
                .map(|(p, j)| (p.0 + j[0], p.1 + j[1]))
                .collect();
            let shifted: Vec<Point> = pts.iter().map(|p| (p.0 + dx, p.1 + dy)).collect();
            let a = fit_circle_lsq(&pts).unwrap();
            let b = fit_circle_lsq(&shifted).unwrap();
            prop_assert!((b.cx - a.cx - dx).abs() < 1e-9);
            prop_assert!((b.cy - a.cy - dy).abs() < 1e-9);
            prop_assert!((b.r - a.r).abs() < 1e-9);
        }

        #[test]
        fn noiseless_fit_is_exact(
            cx in -100.0f64..100.0, cy in -100.0f64..100.0, r in 0.5f64..60.0,
            n in 3usize..50, phase in 0.0f64..6.0,
        ) {
            let fit = fit_circle_lsq(&circle_points(cx, cy, r, n, phase)).unwrap();
            prop_assert!(fit.rms_error < 1e-9);
            prop_assert!((fit.r - r).abs() < 1e-9);
        }
    }
}
