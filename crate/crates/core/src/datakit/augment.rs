use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DataError;
use crate::preprocess::RawImage;

/// Training-time augmentation: horizontal flip, small rotation and contrast
/// adjustment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub hflip_prob: f64,
    pub max_rotation_degrees: f64,
    pub contrast_range: (f64, f64),
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            hflip_prob: 0.5,
            max_rotation_degrees: 10.0,
            contrast_range: (0.8, 1.25),
            seed: 0,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<(), DataError> {
        if !(0.0..=1.0).contains(&self.hflip_prob) {
            return Err(DataError::Config(format!(
                "hflip_prob {} outside [0,1]",
                self.hflip_prob
            )));
        }
        if !(self.max_rotation_degrees.is_finite() && self.max_rotation_degrees >= 0.0) {
            return Err(DataError::Config(
                "max_rotation_degrees must be >= 0".into(),
            ));
        }
        let (lo, hi) = self.contrast_range;
        if !(lo > 0.0 && hi >= lo) {
            return Err(DataError::Config(format!(
                "contrast range ({lo}, {hi}) is invalid"
            )));
        }
        Ok(())
    }

    /// Draws one set of augmentation parameters.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> AugmentDraw {
        let flip = rng.random_bool(self.hflip_prob);
        let angle_degrees = if self.max_rotation_degrees > 0.0 {
            rng.random_range(-self.max_rotation_degrees..=self.max_rotation_degrees)
        } else {
            0.0
        };
        let (lo, hi) = self.contrast_range;
        let contrast = if hi > lo {
            rng.random_range(lo..=hi)
        } else {
            lo
        };
        AugmentDraw {
            flip,
            angle_degrees,
            contrast,
        }
    }
}

/// Concrete augmentation parameters for one image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentDraw {
    pub flip: bool,
    pub angle_degrees: f64,
    pub contrast: f64,
}

impl AugmentDraw {
    pub const IDENTITY: AugmentDraw = AugmentDraw {
        flip: false,
        angle_degrees: 0.0,
        contrast: 1.0,
    };
}

/// Applies flip, then rotation about the image centre (bilinear, source
/// coordinates clamped to the edge), then contrast `c·(p−128)+128`.
pub fn augment(img: &RawImage, draw: &AugmentDraw) -> RawImage {
    let mut out = if draw.flip { hflip(img) } else { img.clone() };
    if draw.angle_degrees != 0.0 {
        out = rotate(&out, draw.angle_degrees);
    }
    if draw.contrast != 1.0 {
        for p in out.pixels_mut() {
            *p = adjust_contrast(*p, draw.contrast);
        }
    }
    out
}

pub(crate) fn adjust_contrast(p: u8, c: f64) -> u8 {
    (c * (p as f64 - 128.0) + 128.0).round().clamp(0.0, 255.0) as u8
}

fn hflip(img: &RawImage) -> RawImage {
    let w = img.width();
    let mut pixels = Vec::with_capacity(img.pixels().len());
    for row in img.pixels().chunks_exact(w * 3) {
        for px in row.chunks_exact(3).rev() {
            pixels.extend_from_slice(px);
        }
    }
    RawImage::new(w, img.height(), pixels).expect("same dims")
}

fn rotate(img: &RawImage, degrees: f64) -> RawImage {
    let (w, h) = (img.width(), img.height());
    let (sin, cos) = degrees.to_radians().sin_cos();
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let src = img.pixels();
    let mut pixels = Vec::with_capacity(src.len());
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            // inverse mapping: rotate the output coordinate back into the source
            let sx = (cx + cos * dx + sin * dy).clamp(0.0, w as f64 - 1.0);
            let sy = (cy - sin * dx + cos * dy).clamp(0.0, h as f64 - 1.0);
            let (x0, y0) = (sx.floor() as usize, sy.floor() as usize);
            let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
            let (fx, fy) = (sx - x0 as f64, sy - y0 as f64);
            for c in 0..3 {
                let at = |xx: usize, yy: usize| src[(yy * w + xx) * 3 + c] as f64;
                let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
                let bot = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
                pixels.push((top * (1.0 - fy) + bot * fy).round() as u8);
            }
        }
    }
    RawImage::new(w, h, pixels).expect("same dims")
}
