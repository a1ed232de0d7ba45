use super::mask::{Label, LabelMask, Target};
use crate::error::{Error, Result};

/// Binary image of the target region, row-major.
pub fn target_region(mask: &LabelMask, target: Target) -> Vec<bool> {
    let mut out = Vec::with_capacity(mask.width() * mask.height());
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            out.push(target.covers(mask.get(x, y)));
        }
    }
    out
}

/// Binary erosion with the 3x3 cross. Pixels outside the image count as
/// background, so the image border erodes.
pub fn erode_cross(region: &[bool], width: usize, height: usize) -> Vec<bool> {
    let at = |x: usize, y: usize| region[y * width + x];
    let mut out = vec![false; region.len()];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = at(x, y)
                && x > 0
                && y > 0
                && x + 1 < width
                && y + 1 < height
                && at(x - 1, y)
                && at(x + 1, y)
                && at(x, y - 1)
                && at(x, y + 1);
        }
    }
    out
}

/// Pixels of `region XOR erode(region)`, in raster order.
pub fn boundary_pixels(mask: &LabelMask, target: Target) -> Result<Vec<(usize, usize)>> {
    let present = match target {
        Target::Iris => mask.count(Label::Iris) > 0,
        Target::Pupil => mask.count(Label::Pupil) > 0,
    };
    if !present {
        return Err(Error::NoTargetPixels(target.name()));
    }
    let (w, h) = (mask.width(), mask.height());
    let region = target_region(mask, target);
    let eroded = erode_cross(&region, w, h);
    Ok(region
        .iter()
        .zip(&eroded)
        .enumerate()
        .filter(|(_, (&a, &b))| a ^ b)
        .map(|(i, _)| (i % w, i / w))
        .collect())
}
