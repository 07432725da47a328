//! Synthetic corpora for desk-scale training runs and benchmarks.
//!
//! "human" images are smooth value noise; "ai" images are the same kind of
//! noise carrying a high-frequency checkerboard artifact.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{io_err, DataError, DatasetManifest, ManifestEntry};
use crate::detector::Label;
use crate::preprocess::{encode_png, resize_bilinear, RawImage};

pub const SOURCE_AI: &str = "synthetic-ai";
pub const SOURCE_HUMAN: &str = "synthetic-human";

/// Uniform per-pixel noise, used as content-independent benchmark input.
pub fn noise_image(width: usize, height: usize, seed: u64) -> RawImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pixels = vec![0u8; width * height * 3];
    rng.fill(pixels.as_mut_slice());
    RawImage::new(width, height, pixels).expect("positive dims")
}

/// Low-frequency colour noise: a coarse random grid bilinearly upsampled.
pub fn smooth_noise(side: usize, rng: &mut impl Rng) -> RawImage {
    let grid = rng.random_range(3..=8usize);
    let mut coarse = vec![0u8; grid * grid * 3];
    rng.fill(coarse.as_mut_slice());
    let coarse = RawImage::new(grid, grid, coarse).expect("positive dims");
    resize_bilinear(&coarse, side, side)
}

/// Adds a `±amplitude` checkerboard with `cell`-pixel squares to every
/// channel.
pub fn add_checkerboard(img: &mut RawImage, amplitude: i16, cell: usize) {
    let w = img.width();
    let cell = cell.max(1);
    for (i, px) in img.pixels_mut().chunks_exact_mut(3).enumerate() {
        let (x, y) = (i % w / cell, i / w / cell);
        let sign = if (x + y) % 2 == 0 { 1 } else { -1 };
        for c in px {
            *c = (*c as i16 + sign * amplitude).clamp(0, 255) as u8;
        }
    }
}

pub fn synthetic_image(label: Label, side: usize, rng: &mut impl Rng) -> RawImage {
    let mut img = smooth_noise(side, rng);
    if label == Label::Ai {
        // two-pixel cells survive the sub-pixel resampling of rotation augment
        let amplitude = rng.random_range(40..=64);
        add_checkerboard(&mut img, amplitude, 2);
    }
    img
}

/// Writes `n_ai + n_human` PNGs of `side`×`side` into `dir` together with a
/// `manifest.tsv`, and returns the manifest (rooted at `dir`).
pub fn write_corpus(
    dir: impl AsRef<Path>,
    n_ai: usize,
    n_human: usize,
    side: usize,
    seed: u64,
) -> Result<DatasetManifest, DataError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(n_ai + n_human);
    // interleave classes so manifest order carries no label structure
    let mut labels: Vec<Label> = std::iter::repeat_n(Label::Ai, n_ai)
        .chain(std::iter::repeat_n(Label::Human, n_human))
        .collect();
    rand::seq::SliceRandom::shuffle(labels.as_mut_slice(), &mut rng);
    for (i, label) in labels.into_iter().enumerate() {
        let img = synthetic_image(label, side, &mut rng);
        let name = format!("{:05}_{}.png", i, label);
        let path = dir.join(&name);
        let bytes = encode_png(&img).map_err(|source| DataError::Image {
            path: path.display().to_string(),
            source,
        })?;
        std::fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        entries.push(ManifestEntry {
            path: name,
            label,
            source: match label {
                Label::Ai => SOURCE_AI.into(),
                Label::Human => SOURCE_HUMAN.into(),
            },
        });
    }
    let manifest = DatasetManifest::new(entries)?.with_root(dir);
    manifest.save(dir.join("manifest.tsv"))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkerboard_alternates() {
        let mut img = RawImage::filled(4, 2, [100, 100, 100]);
        add_checkerboard(&mut img, 20, 1);
        assert_eq!(img.pixel(0, 0), [120; 3]);
        assert_eq!(img.pixel(1, 0), [80; 3]);
        assert_eq!(img.pixel(0, 1), [80; 3]);
        let mut img = RawImage::filled(4, 2, [100, 100, 100]);
        add_checkerboard(&mut img, 20, 2);
        assert_eq!(img.pixel(1, 1), [120; 3]);
        assert_eq!(img.pixel(2, 0), [80; 3]);
    }

    #[test]
    fn noise_is_seeded() {
        assert_eq!(noise_image(8, 8, 1), noise_image(8, 8, 1));
        assert_ne!(noise_image(8, 8, 1), noise_image(8, 8, 2));
    }
}
