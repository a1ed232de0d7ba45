//! Domain types shared by every stage: capture conditions, eyes, per-frame
//! geometry and labelled sequences.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Capture condition of a sequence. The declaration order is the fixed class
/// order used for class indices, probability vectors and tie breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Control,
    Alcohol,
    Drug,
    Sleep,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::Control,
        Condition::Alcohol,
        Condition::Drug,
        Condition::Sleep,
    ];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Condition> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Control => "control",
            Condition::Alcohol => "alcohol",
            Condition::Drug => "drug",
            Condition::Sleep => "sleep",
        }
    }

    pub fn fit_class(self) -> FitClass {
        match self {
            Condition::Control => FitClass::Fit,
            _ => FitClass::Unfit,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "control" => Ok(Condition::Control),
            "alcohol" => Ok(Condition::Alcohol),
            "drug" => Ok(Condition::Drug),
            "sleep" => Ok(Condition::Sleep),
            other => Err(format!(
                "unknown condition `{other}` (expected control, alcohol, drug or sleep)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitClass {
    Fit,
    Unfit,
}

impl FitClass {
    pub const ALL: [FitClass; 2] = [FitClass::Fit, FitClass::Unfit];

    pub fn as_str(self) -> &'static str {
        match self {
            FitClass::Fit => "fit",
            FitClass::Unfit => "unfit",
        }
    }
}

impl fmt::Display for FitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Eye {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
    #[serde(rename = "M")]
    Mono,
}

impl Eye {
    pub fn code(self) -> &'static str {
        match self {
            Eye::Left => "L",
            Eye::Right => "R",
            Eye::Mono => "M",
        }
    }
}

impl fmt::Display for Eye {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Eye {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "L" => Ok(Eye::Left),
            "R" => Ok(Eye::Right),
            "M" => Ok(Eye::Mono),
            other => Err(format!("unknown eye `{other}` (expected L, R or M)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Pupil and iris geometry measured on one frame, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameGeometry {
    /// Seconds since capture start.
    pub t: f64,
    pub pupil_rx: f64,
    pub pupil_ry: f64,
    pub iris_rx: f64,
    pub iris_ry: f64,
    pub pupil_cx: f64,
    pub pupil_cy: f64,
    pub iris_cx: f64,
    pub iris_cy: f64,
    pub valid: bool,
}

impl FrameGeometry {
    pub fn pupil_r(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.pupil_rx,
            Axis::Y => self.pupil_ry,
        }
    }

    pub fn iris_r(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.iris_rx,
            Axis::Y => self.iris_ry,
        }
    }

    /// Checks the frame invariants: non-negative radii and time, and for
    /// valid frames a positive iris that contains the pupil on both axes.
    pub fn is_consistent(&self) -> bool {
        let radii = [self.pupil_rx, self.pupil_ry, self.iris_rx, self.iris_ry];
        if self.t < 0.0 || radii.iter().any(|r| !(*r >= 0.0)) {
            return false;
        }
        !self.valid
            || (self.iris_rx > 0.0
                && self.iris_ry > 0.0
                && self.pupil_rx <= self.iris_rx
                && self.pupil_ry <= self.iris_ry)
    }

    /// Multiplies every radius by `k`.
    pub fn scaled(mut self, k: f64) -> Self {
        self.pupil_rx *= k;
        self.pupil_ry *= k;
        self.iris_rx *= k;
        self.iris_ry *= k;
        self
    }
}

/// One capture session of one eye.
#[derive(Debug, Clone, PartialEq)]
pub struct EyeSequence {
    pub id: String,
    pub eye: Eye,
    pub condition: Condition,
    pub fps: f64,
    pub frames: Vec<FrameGeometry>,
}

impl EyeSequence {
    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 / self.fps
    }

    pub fn valid_fraction(&self) -> f64 {
        if self.frames.is_empty() {
            return 0.0;
        }
        self.frames.iter().filter(|f| f.valid).count() as f64 / self.frames.len() as f64
    }
}
