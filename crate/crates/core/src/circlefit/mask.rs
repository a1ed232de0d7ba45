use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};

pub const BACKGROUND_CODE: u8 = 0;
pub const IRIS_CODE: u8 = 128;
pub const PUPIL_CODE: u8 = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Background,
    Iris,
    Pupil,
}

impl Label {
    pub fn code(self) -> u8 {
        match self {
            Label::Background => BACKGROUND_CODE,
            Label::Iris => IRIS_CODE,
            Label::Pupil => PUPIL_CODE,
        }
    }

    pub fn from_code(code: u8) -> Option<Label> {
        match code {
            BACKGROUND_CODE => Some(Label::Background),
            IRIS_CODE => Some(Label::Iris),
            PUPIL_CODE => Some(Label::Pupil),
            _ => None,
        }
    }
}

/// Structure being localised. The iris region covers the whole iris disc,
/// that is iris-labelled and pupil-labelled pixels together.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Iris,
    Pupil,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Iris => "iris",
            Target::Pupil => "pupil",
        }
    }

    pub fn covers(self, label: Label) -> bool {
        match self {
            Target::Iris => matches!(label, Label::Iris | Label::Pupil),
            Target::Pupil => label == Label::Pupil,
        }
    }
}

/// Row-major segmentation labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    width: usize,
    height: usize,
    labels: Vec<Label>,
}

impl LabelMask {
    pub fn new(width: usize, height: usize, labels: Vec<Label>) -> Result<Self> {
        if width * height != labels.len() {
            return Err(Error::Config(format!(
                "mask of {width}x{height} needs {} labels, got {}",
                width * height,
                labels.len()
            )));
        }
        Ok(LabelMask {
            width,
            height,
            labels,
        })
    }

    pub fn filled(width: usize, height: usize, label: Label) -> Self {
        LabelMask {
            width,
            height,
            labels: vec![label; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Label {
        self.labels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, label: Label) {
        self.labels[y * self.width + x] = label;
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Labels every pixel inside the axis-aligned ellipse.
    pub fn paint_ellipse(&mut self, cx: f64, cy: f64, rx: f64, ry: f64, label: Label) {
        if !(rx > 0.0 && ry > 0.0) {
            return;
        }
        let y0 = (cy - ry).floor().max(0.0) as usize;
        let y1 = ((cy + ry).ceil().max(0.0) as usize).min(self.height.saturating_sub(1));
        let x0 = (cx - rx).floor().max(0.0) as usize;
        let x1 = ((cx + rx).ceil().max(0.0) as usize).min(self.width.saturating_sub(1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                let u = (x as f64 - cx) / rx;
                let v = (y as f64 - cy) / ry;
                if u * u + v * v <= 1.0 {
                    self.set(x, y, label);
                }
            }
        }
    }

    /// Sets to background every pixel above row `y_limit` (exclusive).
    pub fn erase_above(&mut self, y_limit: f64) {
        for y in 0..self.height {
            if (y as f64) < y_limit {
                for x in 0..self.width {
                    self.set(x, y, Label::Background);
                }
            }
        }
    }

    /// Reads an 8-bit binary PGM (P5) with codes 0, 128 and 255.
    pub fn load_pgm(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode_pgm(&bytes).map_err(|message| Error::Image {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn decode_pgm(bytes: &[u8]) -> Result<Self, String> {
        if !bytes.starts_with(b"P5") {
            return Err("not a binary PGM (P5) file".into());
        }
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Pnm)
            .map_err(|e| e.to_string())?;
        let gray = match img {
            image::DynamicImage::ImageLuma8(g) => g,
            _ => return Err("expected an 8-bit grayscale mask".into()),
        };
        let (w, h) = gray.dimensions();
        let labels = gray
            .as_raw()
            .iter()
            .map(|&c| Label::from_code(c).ok_or_else(|| format!("unexpected pixel code {c}")))
            .collect::<Result<Vec<_>, _>>()?;
        LabelMask::new(w as usize, h as usize, labels).map_err(|e| e.to_string())
    }

    pub fn encode_pgm(&self) -> Vec<u8> {
        let raw: Vec<u8> = self.labels.iter().map(|l| l.code()).collect();
        let mut out = Vec::with_capacity(raw.len() + 20);
        PnmEncoder::new(&mut out)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&raw, self.width as u32, self.height as u32, ExtendedColorType::L8)
            .expect("in-memory PGM encoding");
        out
    }

    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.encode_pgm()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip() {
        let mut m = LabelMask::filled(17, 11, Label::Background);
        m.paint_ellipse(8.0, 5.0, 6.0, 4.0, Label::Iris);
        m.paint_ellipse(8.0, 5.0, 2.0, 2.0, Label::Pupil);
        let bytes = m.encode_pgm();
        assert!(bytes.starts_with(b"P5"));
        assert_eq!(LabelMask::decode_pgm(&bytes).unwrap(), m);
    }

    #[test]
    fn unknown_code_rejected() {
        let mut bytes = b"P5\n2 1\n255\n".to_vec();
        bytes.extend([0u8, 7]);
        assert!(LabelMask::decode_pgm(&bytes).unwrap_err().contains("code 7"));
        assert!(LabelMask::decode_pgm(b"P2\n1 1\n255\n0\n").is_err());
    }

    #[test]
    fn size_checked() {
        assert!(LabelMask::new(3, 3, vec![Label::Background; 8]).is_err());
    }

    #[test]
    fn iris_target_includes_pupil() {
        assert!(Target::Iris.covers(Label::Pupil));
        assert!(!Target::Pupil.covers(Label::Iris));
        assert!(!Target::Iris.covers(Label::Background));
    }
}
