//! Pupil and iris localisation from label masks: one-pixel boundaries by
//! erosion and XOR, algebraic least-squares circles, and per-axis radii.

mod boundary;
mod fit;
mod localize;
mod mask;

pub use boundary::{boundary_pixels, erode_cross, target_region};
pub use fit::fit_circle_lsq;
pub use localize::{axis_radii, localize_eye, localize_manifest, ManifestRow};
pub use mask::{Label, LabelMask, Target};

use serde::{Deserialize, Serialize};

/// Pixel coordinates `(x, y)`; x grows to the right, y downwards.
pub type Point = (f64, f64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleEstimate {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
    /// Root-mean-square radial residual of the fitted points.
    pub rms_error: f64,
    pub n_points: usize,
}

impl CircleEstimate {
    pub fn contains(&self, p: Point) -> bool {
        (p.0 - self.cx).hypot(p.1 - self.cy) <= self.r
    }
}
