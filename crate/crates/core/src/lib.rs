//! Fitness-for-duty screening from pupil and iris time series.
//!
//! The pipeline runs from segmentation masks (or pre-extracted per-frame
//! geometry) through pupil-iris ratio preprocessing, a fixed 50-slot
//! behavioural feature vector, per-condition baseline curves and three
//! classifier families, to four-class and Fit/Unfit evaluation reports.
//! A calibrated synthetic generator makes the whole chain runnable without
//! recorded data.

pub mod circlefit;
pub mod classifiers;
pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod features;
pub mod io;
pub mod model;
pub mod rng;
pub mod series;
pub mod synth;

pub use error::{Error, Result};
pub use model::{Axis, Condition, Eye, EyeSequence, FitClass, FrameGeometry};
pub use series::TimeSeries;
