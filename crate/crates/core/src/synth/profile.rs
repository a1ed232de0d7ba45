use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Condition;

/// Generative parameters of one condition. Ratios are pupil radius over
/// iris radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassProfile {
    pub condition: Condition,
    pub base_ratio: f64,
    pub adapt_amplitude: f64,
    /// Time constant of the initial dilation, seconds.
    pub adapt_tau: f64,
    /// Ratio change per second after adaptation.
    pub drift_slope: f64,
    /// Per-frame Gaussian noise on the ratio.
    pub noise_sigma: f64,
    /// Blink events per second.
    pub blink_rate: f64,
    /// Per-frame random-walk step of the eye centre, pixels.
    pub centre_jitter_sigma: f64,
    /// Between-sequence spread of the base ratio.
    #[serde(default)]
    pub subject_sigma: f64,
    /// Between-sequence spread of the drift slope.
    #[serde(default)]
    pub drift_sigma: f64,
    /// Fraction of the iris height hidden by the upper eyelid.
    #[serde(default)]
    pub eyelid_occlusion: f64,
}

impl ClassProfile {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.base_ratio,
            self.adapt_amplitude,
            self.adapt_tau,
            self.drift_slope,
            self.noise_sigma,
            self.blink_rate,
            self.centre_jitter_sigma,
            self.subject_sigma,
            self.drift_sigma,
            self.eyelid_occlusion,
        ]
        .iter()
        .all(|v| v.is_finite());
        let ok = finite
            && self.adapt_tau > 0.0
            && self.noise_sigma >= 0.0
            && self.blink_rate >= 0.0
            && self.centre_jitter_sigma >= 0.0
            && self.subject_sigma >= 0.0
            && self.drift_sigma >= 0.0
            && (0.0..0.5).contains(&self.eyelid_occlusion)
            && self.base_ratio > 0.0
            && self.base_ratio < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid {} profile: {self:?}", self.condition)))
        }
    }
}

/// Calibration defaults. These are tuning constants for the generator, not
/// measured values.
pub fn default_profiles() -> Vec<ClassProfile> {
    let p = |condition, base_ratio, adapt_amplitude, drift_slope, noise_sigma, blink_rate, centre_jitter_sigma, eyelid_occlusion| ClassProfile {
        condition,
        base_ratio,
        adapt_amplitude,
        adapt_tau: 0.8,
        drift_slope,
        noise_sigma,
        blink_rate,
        centre_jitter_sigma,
        subject_sigma: 0.03,
        drift_sigma: 0.0015,
        eyelid_occlusion,
    };
    vec![
        p(Condition::Control, 0.35, 0.04, 0.0005, 0.010, 0.20, 0.30, 0.0),
        p(Condition::Alcohol, 0.42, 0.06, 0.0040, 0.015, 0.30, 0.90, 0.0),
        p(Condition::Drug, 0.40, 0.05, 0.0025, 0.014, 0.25, 0.70, 0.2),
        p(Condition::Sleep, 0.375, 0.05, 0.0015, 0.016, 0.35, 0.60, 0.0),
    ]
}

/// How far apart the class profiles are pushed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Easy,
    #[default]
    Moderate,
    Hard,
}

impl Preset {
    /// `(separation, variability)`: separation multiplies each class's gap
    /// to control in base ratio and drift; variability multiplies the
    /// between-sequence spreads.
    pub fn factors(self) -> (f64, f64) {
        match self {
            Preset::Easy => (3.0, 0.2),
            Preset::Moderate => (1.0, 1.0),
            Preset::Hard => (0.5, 1.25),
        }
    }
}

/// Applies the separation and variability knobs and checks the drift
/// ordering alcohol > drug > sleep > control.
pub fn resolve_profiles(profiles: &[ClassProfile], separation: f64, variability: f64) -> Result<Vec<ClassProfile>> {
    if !(separation > 0.0 && separation.is_finite() && variability >= 0.0 && variability.is_finite()) {
        return Err(Error::Config(format!(
            "separation must be positive and variability non-negative (got {separation}, {variability})"
        )));
    }
    let mut ordered = Vec::with_capacity(Condition::COUNT);
    for c in Condition::ALL {
        let mut matching = profiles.iter().filter(|p| p.condition == c);
        match (matching.next(), matching.next()) {
            (Some(p), None) => ordered.push(p.clone()),
            _ => return Err(Error::Config(format!("expected exactly one {c} profile"))),
        }
    }
    let control = ordered[Condition::Control.index()].clone();
    for p in &mut ordered {
        p.base_ratio = control.base_ratio + separation * (p.base_ratio - control.base_ratio);
        p.drift_slope = control.drift_slope + separation * (p.drift_slope - control.drift_slope);
        p.subject_sigma *= variability;
        p.drift_sigma *= variability;
        p.validate()?;
    }
    let drift = |c: Condition| ordered[c.index()].drift_slope;
    if !(drift(Condition::Alcohol) > drift(Condition::Drug)
        && drift(Condition::Drug) > drift(Condition::Sleep)
        && drift(Condition::Sleep) > drift(Condition::Control))
    {
        return Err(Error::Config(
            "drift slopes must be ordered alcohol > drug > sleep > control".into(),
        ));
    }
    Ok(ordered)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let p = resolve_profiles(&default_profiles(), 1.0, 1.0).unwrap();
        assert_eq!(p, default_profiles());
    }

    #[test]
    fn separation_scales_gaps_to_control() {
        let base = default_profiles();
        let p = resolve_profiles(&base, 2.0, 0.5).unwrap();
        let gap = |v: &[ClassProfile], c: Condition| v[c.index()].drift_slope - v[0].drift_slope;
        assert!((gap(&p, Condition::Alcohol) - 2.0 * gap(&base, Condition::Alcohol)).abs() < 1e-15);
        assert_eq!(p[0].drift_slope, base[0].drift_slope);
        assert_eq!(p[1].subject_sigma, base[1].subject_sigma * 0.5);
    }

    #[test]
    fn ordering_enforced() {
        let mut base = default_profiles();
        base[Condition::Sleep.index()].drift_slope = 0.0001;
        assert!(resolve_profiles(&base, 1.0, 1.0).is_err());
        let mut base = default_profiles();
        base[0].adapt_tau = 0.0;
        assert!(resolve_profiles(&base, 1.0, 1.0).is_err());
        assert!(resolve_profiles(&default_profiles()[..3], 1.0, 1.0).is_err());
    }
}
