use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::circlefit::{Label, LabelMask};
use crate::error::{Error, Result};
use crate::model::{EyeSequence, FrameGeometry};

/// Draws a frame as a label mask: iris disc, pupil disc on top, and for
/// occluded frames (`iris_ry < iris_rx`) everything above the eyelid line
/// erased, so the visible vertical iris extent equals `2 * iris_ry`.
/// Invalid frames are blank.
pub fn render_frame(frame: &FrameGeometry, width: usize, height: usize) -> LabelMask {
    let mut mask = LabelMask::filled(width, height, Label::Background);
    if !frame.valid {
        return mask;
    }
    let r = frame.iris_rx;
    mask.paint_ellipse(frame.iris_cx, frame.iris_cy, r, r, Label::Iris);
    mask.paint_ellipse(frame.pupil_cx, frame.pupil_cy, frame.pupil_rx, frame.pupil_ry, Label::Pupil);
    if frame.iris_ry < r {
        mask.erase_above(frame.iris_cy + r - 2.0 * frame.iris_ry);
    }
    mask
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskCorpus {
    pub manifest: PathBuf,
    pub frames: usize,
}

/// Writes one PGM per frame under `out_dir/masks/` and a manifest
/// (`id,eye,condition,t,mask_path`) at `out_dir/manifest.csv`, with mask
/// paths relative to the manifest.
pub fn generate_mask_corpus(
    sequences: &[EyeSequence],
    width: usize,
    height: usize,
    out_dir: impl AsRef<Path>,
) -> Result<MaskCorpus> {
    let out_dir = out_dir.as_ref();
    let mask_dir = out_dir.join("masks");
    std::fs::create_dir_all(&mask_dir).map_err(|e| Error::io(&mask_dir, e))?;
    let jobs: Vec<(String, &EyeSequence, &FrameGeometry)> = sequences
        .iter()
        .flat_map(|seq| {
            seq.frames
                .iter()
                .enumerate()
                .map(move |(i, f)| (format!("masks/{}_{}_{i:04}.pgm", seq.id, seq.eye), seq, f))
        })
        .collect();
    jobs.par_iter()
        .try_for_each(|(rel, _, frame)| render_frame(frame, width, height).save_pgm(out_dir.join(rel)))?;

    let manifest = out_dir.join("manifest.csv");
    let file = File::create(&manifest).map_err(|e| Error::io(&manifest, e))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "id,eye,condition,t,mask_path")?;
        for (rel, seq, frame) in &jobs {
            writeln!(w, "{},{},{},{:.6},{}", seq.id, seq.eye, seq.condition, frame.t, rel)?;
        }
        w.flush()
    };
    write(&mut w).map_err(|e| Error::io(&manifest, e))?;
    Ok(MaskCorpus {
        manifest,
        frames: jobs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circlefit::{localize_eye, localize_manifest};
    use crate::model::{Condition, Eye};

    fn frame(iris: f64, pupil: f64, iris_ry: f64) -> FrameGeometry {
        FrameGeometry {
            t: 0.0,
            pupil_rx: pupil,
            pupil_ry: pupil,
            iris_rx: iris,
            iris_ry,
            pupil_cx: 100.3,
            pupil_cy: 79.6,
            iris_cx: 100.0,
            iris_cy: 80.0,
            valid: true,
        }
    }

    #[test]
    fn unoccluded_round_trip() {
        let got = localize_eye(&render_frame(&frame(30.0, 12.0, 30.0), 200, 160));
        assert!(got.valid);
        for (a, b) in [(got.iris_rx, 30.0), (got.iris_ry, 30.0), (got.pupil_rx, 12.0), (got.pupil_ry, 12.0)] {
            assert!((a - b).abs() <= 1.0, "{a} vs {b}");
        }
    }

    #[test]
    fn occlusion_shortens_recovered_iris() {
        let got = localize_eye(&render_frame(&frame(30.0, 12.0, 30.0 * 0.6), 200, 160));
        assert!(got.iris_ry < got.iris_rx);
    }

    #[test]
    fn manifest_lists_every_frame() {
        let dir = tempfile::tempdir().unwrap();
        let frames: Vec<FrameGeometry> = (0..100)
            .map(|i| FrameGeometry {
                t: i as f64 / 15.0,
                ..frame(35.0, 14.0, 35.0)
            })
            .collect();
        let seq = EyeSequence {
            id: "s1".into(),
            eye: Eye::Left,
            condition: Condition::Sleep,
            fps: 15.0,
            frames,
        };
        let corpus = generate_mask_corpus(std::slice::from_ref(&seq), 200, 160, dir.path()).unwrap();
        assert_eq!(corpus.frames, 100);
        let text = std::fs::read_to_string(&corpus.manifest).unwrap();
        assert_eq!(text.lines().count(), 101);
        let back = localize_manifest(&corpus.manifest).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].frames.len(), 100);
        assert_eq!(back[0].condition, Condition::Sleep);
    }
}
