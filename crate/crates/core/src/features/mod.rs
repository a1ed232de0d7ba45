//! The 50-slot behavioural feature vector and the per-condition
//! representative curves it is measured against.
//!
//! Every slot is computed on the x-axis pupil-iris ratio after
//! preprocessing; the y axis only enters through the sequence's own 3-D
//! trend line used for the distance slots.
//!
//! | slots    | content                                             |
//! |----------|-----------------------------------------------------|
//! | 0..2     | full-sequence trend slope and intercept             |
//! | 2..4     | first-second trend slope and intercept              |
//! | 4..23    | 19 moving-window slopes (1 s window, 0.5 s hop)     |
//! | 23..27   | skew-line distance to control/alcohol/drug/sleep    |
//! | 27..31   | mean, standard deviation, range, CV                 |
//! | 31..35   | curve σ over sequence mean, per condition           |
//! | 35..50   | ratio sampled at 3 Hz over the first 5 s            |

mod baseline;
mod geometry;
mod stats;
mod trend;
mod vector;

pub use baseline::{build_baselines, representative_line, Baselines, RepresentativeCurve};
pub use geometry::{skew_distance, Line3D};
pub use stats::{cv_to_curve, ratio_samples, sequence_stats, SequenceStats};
pub use trend::{linear_trend, moving_trend, starting_trend, MovingTrend, TrendLine};
pub use vector::{
    build_feature_vector, extract_dataset, extract_features, read_feature_vectors,
    write_feature_vectors, Diagnostics, ExtractionOptions, EyeFusion, FeatureLayout,
    FeatureVector, SkippedSequence,
};

use std::ops::Range;

pub const FEATURE_LEN: usize = 50;

pub const TREND: Range<usize> = 0..2;
pub const STARTING_TREND: Range<usize> = 2..4;
pub const MOVING_TREND: Range<usize> = 4..23;
pub const DISTANCES: Range<usize> = 23..27;
pub const STATISTICS: Range<usize> = 27..31;
pub const CV_TO_CURVES: Range<usize> = 31..35;
pub const RATIO_SAMPLES: Range<usize> = 35..50;

pub const WINDOW_SECONDS: f64 = 1.0;
pub const HOP_SECONDS: f64 = 0.5;
pub const RATIO_SAMPLE_COUNT: usize = 15;
pub const RATIO_SAMPLE_SPAN_SECONDS: f64 = 5.0;
