use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::profile::{default_profiles, resolve_profiles, ClassProfile, Preset};
use crate::classifiers::Split;
use crate::error::{Error, Result};
use crate::model::{Condition, Eye, EyeSequence, FrameGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassCounts {
    pub control: usize,
    pub alcohol: usize,
    pub drug: usize,
    pub sleep: usize,
}

impl ClassCounts {
    pub const fn new(control: usize, alcohol: usize, drug: usize, sleep: usize) -> Self {
        ClassCounts {
            control,
            alcohol,
            drug,
            sleep,
        }
    }

    pub fn get(&self, c: Condition) -> usize {
        match c {
            Condition::Control => self.control,
            Condition::Alcohol => self.alcohol,
            Condition::Drug => self.drug,
            Condition::Sleep => self.sleep,
        }
    }

    pub fn total(&self) -> usize {
        self.control + self.alcohol + self.drug + self.sleep
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitCounts {
    pub train: ClassCounts,
    pub validation: ClassCounts,
    pub test: ClassCounts,
}

impl Default for SplitCounts {
    fn default() -> Self {
        SplitCounts {
            train: ClassCounts::new(247, 247, 62, 69),
            validation: ClassCounts::new(35, 35, 9, 9),
            test: ClassCounts::new(688, 72, 17, 20),
        }
    }
}

impl SplitCounts {
    pub fn get(&self, split: Split) -> ClassCounts {
        match split {
            Split::Train => self.train,
            Split::Validation => self.validation,
            Split::Test => self.test,
        }
    }

    /// Counts for a single split, zero elsewhere.
    pub fn only(split: Split, counts: ClassCounts) -> Self {
        let zero = ClassCounts::default();
        let mut s = SplitCounts {
            train: zero,
            validation: zero,
            test: zero,
        };
        match split {
            Split::Train => s.train = counts,
            Split::Validation => s.validation = counts,
            Split::Test => s.test = counts,
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub fps: f64,
    /// Seconds per sequence.
    pub duration: f64,
    pub iris_radius_px: f64,
    pub counts: SplitCounts,
    pub preset: Preset,
    /// Overrides the preset's separation factor.
    pub separation: Option<f64>,
    /// Overrides the preset's variability factor.
    pub variability: Option<f64>,
    pub profiles: Vec<ClassProfile>,
    /// Mask canvas in pixels; centres stay far enough from the border for
    /// the whole iris to fit.
    pub width: usize,
    pub height: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            fps: 15.0,
            duration: 10.0,
            iris_radius_px: 40.0,
            counts: SplitCounts::default(),
            preset: Preset::Moderate,
            separation: None,
            variability: None,
            profiles: default_profiles(),
            width: 200,
            height: 160,
        }
    }
}

impl GeneratorConfig {
    pub fn with_preset(mut self, preset: Preset) -> Self {
        self.preset = preset;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Profiles after the separation and variability knobs, in class order.
    pub fn effective_profiles(&self) -> Result<Vec<ClassProfile>> {
        let (s, v) = self.preset.factors();
        resolve_profiles(&self.profiles, self.separation.unwrap_or(s), self.variability.unwrap_or(v))
    }

    pub fn geometry(&self) -> Result<Geometry> {
        let g = Geometry {
            fps: self.fps,
            duration: self.duration,
            iris_radius_px: self.iris_radius_px,
            width: self.width as f64,
            height: self.height as f64,
        };
        let margin = 2.0 * g.iris_radius_px * 1.2 + 4.0;
        if !(g.fps > 0.0 && g.duration >= 5.0 && g.iris_radius_px > 0.0) {
            return Err(Error::Config(format!(
                "generator needs fps > 0, duration >= 5 s and a positive iris radius (got {} fps, {} s, {} px)",
                g.fps, g.duration, g.iris_radius_px
            )));
        }
        if g.width < margin || g.height < margin {
            return Err(Error::Config(format!(
                "a {}x{} canvas is too small for a {} px iris",
                self.width, self.height, g.iris_radius_px
            )));
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub fps: f64,
    pub duration: f64,
    pub iris_radius_px: f64,
    pub width: f64,
    pub height: f64,
}

fn normal(sigma: f64) -> Normal<f64> {
    Normal::new(0.0, sigma).expect("sigma validated non-negative and finite")
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

/// One synthetic capture.
///
/// The x ratio follows `base + amp (1 - exp(-t/tau)) + drift t + noise`,
/// with per-sequence offsets on base and drift. Blinks blank 3 to 7 frames.
/// The iris centre walks with the profile's per-frame step and the pupil
/// centre stays close to it.
pub fn generate_sequence<R: Rng>(
    profile: &ClassProfile,
    geometry: &Geometry,
    id: impl Into<String>,
    eye: Eye,
    rng: &mut R,
) -> Result<EyeSequence> {
    profile.validate()?;
    if geometry.duration < 5.0 {
        return Err(Error::TooShort {
            duration: geometry.duration,
            required: 5.0,
        });
    }
    let n = (geometry.duration * geometry.fps).round() as usize;
    let subject = profile.base_ratio + normal(profile.subject_sigma).sample(rng);
    let drift = profile.drift_slope + normal(profile.drift_sigma).sample(rng);
    let iris_r = geometry.iris_radius_px * (1.0 + normal(0.03).sample(rng));
    let occlusion = profile.eyelid_occlusion * rng.random_range(0.75..1.25);

    let r_max = geometry.iris_radius_px * 1.2;
    let clamp_x = |x: f64| x.clamp(r_max + 2.0, geometry.width - r_max - 2.0);
    let clamp_y = |y: f64| y.clamp(r_max + 2.0, geometry.height - r_max - 2.0);
    let mut cx = clamp_x(geometry.width / 2.0 + normal(4.0).sample(rng));
    let mut cy = clamp_y(geometry.height / 2.0 + normal(3.0).sample(rng));
    let (mut ox, mut oy) = (0.0, 0.0);

    let step = normal(profile.centre_jitter_sigma);
    let pupil_step = normal(profile.centre_jitter_sigma * 0.5);
    let ratio_noise = normal(profile.noise_sigma);
    let radius_noise = normal(0.15);

    let mut blink_left = 0usize;
    let blink_p = profile.blink_rate / geometry.fps;
    let mut frames = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / geometry.fps;
        cx = clamp_x(cx + step.sample(rng));
        cy = clamp_y(cy + step.sample(rng));
        ox = 0.8 * ox + pupil_step.sample(rng);
        oy = 0.8 * oy + pupil_step.sample(rng);
        let adapt = profile.adapt_amplitude * (1.0 - (-t / profile.adapt_tau).exp());
        let ratio = (subject + adapt + drift * t + ratio_noise.sample(rng)).clamp(0.05, 0.9);
        let ratio_y = (ratio + 0.5 * ratio_noise.sample(rng)).clamp(0.05, 0.9);
        let rx = iris_r + radius_noise.sample(rng);
        let ry = rx * (1.0 - occlusion);
        if blink_left == 0 && rng.random::<f64>() < blink_p {
            blink_left = rng.random_range(3..=7);
        }
        let blinking = blink_left > 0;
        blink_left = blink_left.saturating_sub(1);

        // keep the pupil well inside the iris
        let limit = 0.5 * (1.0 - ratio) * rx;
        let (px, py) = (ox.clamp(-limit, limit), oy.clamp(-limit, limit));
        let frame = if blinking {
            FrameGeometry {
                t,
                valid: false,
                ..Default::default()
            }
        } else {
            FrameGeometry {
                t,
                pupil_rx: round4(ratio * rx),
                pupil_ry: round4((ratio_y * rx).min(ry)),
                iris_rx: round4(rx),
                iris_ry: round4(ry),
                pupil_cx: round4(cx + px),
                pupil_cy: round4(cy + py),
                iris_cx: round4(cx),
                iris_cy: round4(cy),
                valid: true,
            }
        };
        frames.push(frame);
    }
    Ok(EyeSequence {
        id: id.into(),
        eye,
        condition: profile.condition,
        fps: geometry.fps,
        frames,
    })
}

/// Identity of one generated sequence: its split, condition and global
/// index, which selects the random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceSlot {
    pub split: Split,
    pub condition: Condition,
    pub index: u64,
}

impl SequenceSlot {
    pub fn id(&self) -> String {
        format!("{}-{:05}", self.split, self.index)
    }

    pub fn eye(&self) -> Eye {
        if self.index.is_multiple_of(2) {
            Eye::Left
        } else {
            Eye::Right
        }
    }
}

/// Every sequence of the configuration in file order: splits train,
/// validation, test; within a split, conditions in class order.
pub fn sequence_slots(counts: &SplitCounts) -> Vec<SequenceSlot> {
    let mut out = Vec::new();
    let mut index = 0;
    for split in Split::ALL {
        let c = counts.get(split);
        for condition in Condition::ALL {
            for _ in 0..c.get(condition) {
                out.push(SequenceSlot { split, condition, index });
                index += 1;
            }
        }
    }
    out
}

/// Random stream of sequence `index`: independent of every other index.
pub fn sequence_rng(seed: u64, index: u64) -> ChaCha8Rng {
    crate::rng::stream(seed, index)
}

/// Generates the sequences of one split in memory.
pub fn generate_split(config: &GeneratorConfig, split: Split) -> Result<Vec<EyeSequence>> {
    let profiles = config.effective_profiles()?;
    let geometry = config.geometry()?;
    let slots: Vec<SequenceSlot> = sequence_slots(&config.counts)
        .into_iter()
        .filter(|s| s.split == split)
        .collect();
    slots
        .par_iter()
        .map(|slot| {
            let mut rng = sequence_rng(config.seed, slot.index);
            generate_sequence(&profiles[slot.condition.index()], &geometry, slot.id(), slot.eye(), &mut rng)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedFiles {
    pub split: Split,
    pub path: PathBuf,
    pub sequences: usize,
}

/// Writes `train.csv`, `validation.csv` and `test.csv` (core sequence
/// schema) under `out_dir`.
pub fn generate_dataset(config: &GeneratorConfig, out_dir: impl AsRef<Path>) -> Result<Vec<GeneratedFiles>> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::new();
    for split in Split::ALL {
        let seqs = generate_split(config, split)?;
        let path = out_dir.join(format!("{split}.csv"));
        crate::io::save_sequences(&path, &seqs)?;
        files.push(GeneratedFiles {
            split,
            path,
            sequences: seqs.len(),
        });
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::linear_trend;
    use crate::model::Axis;
    use crate::series::{ratio_series, TimeSeries};

    fn quiet(drift: f64) -> ClassProfile {
        ClassProfile {
            condition: Condition::Alcohol,
            base_ratio: 0.4,
            adapt_amplitude: 0.0,
            adapt_tau: 0.8,
            drift_slope: drift,
            noise_sigma: 0.0,
            blink_rate: 0.0,
            centre_jitter_sigma: 0.0,
            subject_sigma: 0.0,
            drift_sigma: 0.0,
            eyelid_occlusion: 0.0,
        }
    }

    fn geometry() -> Geometry {
        GeneratorConfig::default().geometry().unwrap()
    }

    fn x_ratios(seq: &EyeSequence) -> Vec<f64> {
        seq.frames.iter().map(|f| f.pupil_rx / f.iris_rx).collect()
    }

    #[test]
    fn constant_when_stochastic_terms_off() {
        let mut rng = sequence_rng(1, 0);
        let seq = generate_sequence(&quiet(0.0), &geometry(), "a", Eye::Left, &mut rng).unwrap();
        assert_eq!(seq.frames.len(), 150);
        for r in x_ratios(&seq) {
            assert!((r - 0.4).abs() < 1e-5, "{r}");
        }
    }

    #[test]
    fn drift_recovered_after_transient() {
        let mut rng = sequence_rng(2, 0);
        let seq = generate_sequence(&quiet(0.004), &geometry(), "a", Eye::Left, &mut rng).unwrap();
        let got = ratio_series(&seq, Axis::X).unwrap();
        let tail = TimeSeries::dense(3.0, 1.0 / 15.0, got.values[45..].to_vec()).unwrap();
        let m = linear_trend(&tail).unwrap().m;
        assert!((m - 0.004).abs() < 1e-6, "{m}");
    }

    #[test]
    fn blinks_blank_short_runs() {
        let mut p = quiet(0.0);
        p.blink_rate = 1.0;
        let mut rng = sequence_rng(3, 0);
        let seq = generate_sequence(&p, &geometry(), "a", Eye::Left, &mut rng).unwrap();
        let invalid = seq.frames.iter().filter(|f| !f.valid).count();
        assert!(invalid > 0);
        let mut run = 0;
        for f in &seq.frames {
            if f.valid {
                assert!(run == 0 || (3..=14).contains(&run));
                run = 0;
            } else {
                assert_eq!((f.pupil_rx, f.iris_rx), (0.0, 0.0));
                run += 1;
            }
        }
    }

    #[test]
    fn frames_are_consistent() {
        let cfg = GeneratorConfig {
            counts: SplitCounts::only(Split::Train, ClassCounts::new(5, 5, 5, 5)),
            ..Default::default()
        };
        for seq in generate_split(&cfg, Split::Train).unwrap() {
            for f in &seq.frames {
                assert!(f.is_consistent());
                if f.valid {
                    assert!(f.pupil_rx <= f.iris_rx && f.pupil_ry <= f.iris_ry);
                }
            }
        }
    }

    #[test]
    fn occlusion_shortens_vertical_iris() {
        let mut p = quiet(0.0);
        p.eyelid_occlusion = 0.3;
        let mut rng = sequence_rng(4, 0);
        let seq = generate_sequence(&p, &geometry(), "a", Eye::Left, &mut rng).unwrap();
        assert!(seq.frames.iter().all(|f| f.iris_ry < f.iris_rx));
    }

    #[test]
    fn default_counts() {
        let slots = sequence_slots(&SplitCounts::default());
        let count = |s: Split| slots.iter().filter(|x| x.split == s).count();
        assert_eq!((count(Split::Train), count(Split::Validation), count(Split::Test)), (625, 88, 797));
        let test_control = slots
            .iter()
            .filter(|x| x.split == Split::Test && x.condition == Condition::Control)
            .count();
        assert_eq!(test_control, 688);
    }

    #[test]
    fn subsets_reproduce_independently() {
        let full = GeneratorConfig {
            counts: SplitCounts::only(Split::Train, ClassCounts::new(3, 2, 0, 0)),
            ..Default::default()
        };
        let all = generate_split(&full, Split::Train).unwrap();
        let profiles = full.effective_profiles().unwrap();
        let mut rng = sequence_rng(full.seed, 3);
        let again = generate_sequence(&profiles[1], &full.geometry().unwrap(), "train-00003", Eye::Right, &mut rng).unwrap();
        assert_eq!(all[3], again);
    }

    #[test]
    fn byte_identical_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = GeneratorConfig {
            counts: SplitCounts::only(Split::Train, ClassCounts::new(1, 0, 0, 0)),
            ..Default::default()
        };
        generate_dataset(&cfg, dir.path().join("a")).unwrap();
        generate_dataset(&cfg, dir.path().join("b")).unwrap();
        for name in ["train.csv", "validation.csv", "test.csv"] {
            let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
            let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
            assert_eq!(a, b);
        }
        let seqs = crate::io::load_sequences(dir.path().join("a/train.csv")).unwrap();
        assert_eq!(seqs.len(), 1);
        assert_eq!(seqs[0].frames.len(), 150);
    }
}
