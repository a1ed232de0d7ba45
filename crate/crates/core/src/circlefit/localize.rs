use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use super::boundary::boundary_pixels;
use super::fit::fit_circle_lsq;
use super::mask::{LabelMask, Target};
use super::{CircleEstimate, Point};
use crate::error::{Error, Result};
use crate::io::{assemble_sequences, FrameRow};
use crate::model::{Condition, Eye, EyeSequence, FrameGeometry};

/// Half-lengths of the contiguous target runs through `centre` along its row
/// (`r_x`) and column (`r_y`). Returns `(0, 0)` when the centre pixel is not
/// part of the target.
pub fn axis_radii(mask: &LabelMask, target: Target, centre: Point) -> Result<(f64, f64)> {
    let (w, h) = (mask.width(), mask.height());
    let (px, py) = (centre.0.round(), centre.1.round());
    if !(px >= 0.0 && py >= 0.0 && px < w as f64 && py < h as f64) {
        return Err(Error::OutsideGrid {
            x: centre.0,
            y: centre.1,
            width: w,
            height: h,
        });
    }
    let (cx, cy) = (px as usize, py as usize);
    let hit = |x: usize, y: usize| target.covers(mask.get(x, y));
    if !hit(cx, cy) {
        return Ok((0.0, 0.0));
    }
    let left = (0..cx).rev().take_while(|&x| hit(x, cy)).count();
    let right = (cx + 1..w).take_while(|&x| hit(x, cy)).count();
    let up = (0..cy).rev().take_while(|&y| hit(cx, y)).count();
    let down = (cy + 1..h).take_while(|&y| hit(cx, y)).count();
    Ok((
        (left + right + 1) as f64 / 2.0,
        (up + down + 1) as f64 / 2.0,
    ))
}

fn fit_target(mask: &LabelMask, target: Target) -> Result<CircleEstimate> {
    let points: Vec<Point> = boundary_pixels(mask, target)?
        .into_iter()
        .map(|(x, y)| (x as f64, y as f64))
        .collect();
    fit_circle_lsq(&points)
}

/// Pupil and iris geometry of one mask. Failures of any stage produce an
/// invalid frame instead of an error; `t` is left at zero for the caller.
///
/// A frame is valid when both circles fit, all four axis radii are positive,
/// the pupil is no wider than the iris on either axis and the pupil centre
/// lies inside the fitted iris circle.
pub fn localize_eye(mask: &LabelMask) -> FrameGeometry {
    let mut frame = FrameGeometry::default();
    let iris = fit_target(mask, Target::Iris);
    let pupil = fit_target(mask, Target::Pupil);
    if let Ok(c) = &iris {
        frame.iris_cx = c.cx;
        frame.iris_cy = c.cy;
        if let Ok((rx, ry)) = axis_radii(mask, Target::Iris, (c.cx, c.cy)) {
            frame.iris_rx = rx;
            frame.iris_ry = ry;
        }
    }
    if let Ok(c) = &pupil {
        frame.pupil_cx = c.cx;
        frame.pupil_cy = c.cy;
        if let Ok((rx, ry)) = axis_radii(mask, Target::Pupil, (c.cx, c.cy)) {
            frame.pupil_rx = rx;
            frame.pupil_ry = ry;
        }
    }
    frame.valid = match (&iris, &pupil) {
        (Ok(i), Ok(p)) => {
            frame.pupil_rx > 0.0
                && frame.pupil_ry > 0.0
                && frame.pupil_rx <= frame.iris_rx
                && frame.pupil_ry <= frame.iris_ry
                && i.contains((p.cx, p.cy))
        }
        _ => false,
    };
    frame
}

/// One line of a mask manifest (`id,eye,condition,t,mask_path`).
#[derive(Debug, Clone, Deserialize)]
pub struct ManifestRow {
    pub id: String,
    pub eye: Eye,
    pub condition: Condition,
    pub t: f64,
    pub mask_path: String,
}

/// Localises every mask listed in a manifest and assembles the frames into
/// sequences. Relative mask paths resolve against the manifest's directory.
/// Unreadable masks are input errors; masks that cannot be localised become
/// invalid frames.
pub fn localize_manifest(manifest: impl AsRef<Path>) -> Result<Vec<EyeSequence>> {
    let manifest = manifest.as_ref();
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(manifest)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(manifest, io),
            other => Error::Parse {
                path: manifest.to_path_buf(),
                line: 1,
                message: format!("{other:?}"),
            },
        })?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            path: manifest.to_path_buf(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    for column in ["id", "eye", "condition", "t", "mask_path"] {
        if !headers.iter().any(|h| h == column) {
            return Err(Error::MissingColumn {
                path: manifest.to_path_buf(),
                column: column.into(),
            });
        }
    }
    let mut rows = Vec::new();
    for record in rdr.deserialize::<ManifestRow>() {
        let row = record.map_err(|e| Error::Parse {
            path: manifest.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        rows.push(row);
    }

    let frames: Vec<Result<FrameRow>> = rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let mask = LabelMask::load_pgm(base.join(&row.mask_path))?;
            let mut frame = localize_eye(&mask);
            frame.t = row.t;
            Ok(FrameRow {
                id: row.id.clone(),
                eye: row.eye,
                condition: row.condition,
                frame,
                line: i as u64 + 2,
            })
        })
        .collect();
    let frames = frames.into_iter().collect::<Result<Vec<_>>>()?;
    assemble_sequences(frames, manifest)
}
