//! Image decoding and the fixed network-input transform: bilinear resize to
//! 256x256 followed by scaling to [0,1].

use std::io::Cursor;

use image::{DynamicImage, ImageFormat, ImageReader};

use crate::engine::reference::{INPUT_CHANNELS, INPUT_SIDE};
use crate::engine::TensorF32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PreprocessError {
    #[error("unsupported image format{}", .0.as_deref().map(|f| format!(" ({f})")).unwrap_or_default())]
    UnsupportedFormat(Option<String>),
    #[error("animated images are not supported")]
    Animated,
    #[error("corrupt image stream: {0}")]
    Corrupt(String),
    #[error("expected a {expected_w}x{expected_h} image, got {width}x{height}")]
    SizeMismatch {
        expected_w: usize,
        expected_h: usize,
        width: usize,
        height: usize,
    },
    #[error("invalid raw image: {0}")]
    InvalidImage(String),
    #[error("png encoding failed: {0}")]
    Encode(String),
}

/// 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl RawImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, PreprocessError> {
        if width == 0 || height == 0 {
            return Err(PreprocessError::InvalidImage(format!(
                "empty dimensions {width}x{height}"
            )));
        }
        if pixels.len() != width * height * 3 {
            return Err(PreprocessError::InvalidImage(format!(
                "{} bytes for {width}x{height} RGB",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let pixels = rgb
            .iter()
            .copied()
            .cycle()
            .take(width * height * 3)
            .collect();
        Self::new(width, height, pixels).expect("non-empty dims")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }
}

/// Network input: a `[256, 256, 3]` tensor with every value in [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor(TensorF32);

impl ImageTensor {
    pub fn from_tensor(t: TensorF32) -> Result<Self, PreprocessError> {
        if t.shape() != [INPUT_SIDE, INPUT_SIDE, INPUT_CHANNELS] {
            return Err(PreprocessError::InvalidImage(format!(
                "tensor shape {:?} is not [256, 256, 3]",
                t.shape()
            )));
        }
        if !t.data().iter().all(|v| (0.0..=1.0).contains(v)) {
            return Err(PreprocessError::InvalidImage(
                "tensor values outside [0,1]".into(),
            ));
        }
        Ok(Self(t))
    }

    pub fn tensor(&self) -> &TensorF32 {
        &self.0
    }

    pub fn into_tensor(self) -> TensorF32 {
        self.0
    }
}

/// Composite one channel over white: `a·src + (1−a)·255`, rounded half up.
fn over_white(src: u8, alpha: u8) -> u8 {
    let num = alpha as u32 * src as u32 + (255 - alpha as u32) * 255;
    ((2 * num + 255) / 510) as u8
}

/// Decodes a PNG or baseline JPEG into RGB. Alpha is composited over white
/// and grayscale is replicated to three channels.
pub fn decode_image(bytes: &[u8]) -> Result<RawImage, PreprocessError> {
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| PreprocessError::Corrupt(e.to_string()))?;
    match reader.format() {
        Some(ImageFormat::Png) => {
            let decoder = image::codecs::png::PngDecoder::new(Cursor::new(bytes))
                .map_err(|e| PreprocessError::Corrupt(e.to_string()))?;
            if decoder
                .is_apng()
                .map_err(|e| PreprocessError::Corrupt(e.to_string()))?
            {
                return Err(PreprocessError::Animated);
            }
        }
        Some(ImageFormat::Jpeg) => {}
        Some(other) => {
            return Err(PreprocessError::UnsupportedFormat(Some(format!(
                "{other:?}"
            ))))
        }
        None => return Err(PreprocessError::UnsupportedFormat(None)),
    }
    let img = reader
        .decode()
        .map_err(|e| PreprocessError::Corrupt(e.to_string()))?;
    from_dynamic(img)
}

fn from_dynamic(img: DynamicImage) -> Result<RawImage, PreprocessError> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = if img.color().has_alpha() {
        let rgba = img.into_rgba8();
        let mut out = Vec::with_capacity(w * h * 3);
        for px in rgba.pixels() {
            let [r, g, b, a] = px.0;
            out.extend_from_slice(&[over_white(r, a), over_white(g, a), over_white(b, a)]);
        }
        out
    } else {
        img.into_rgb8().into_raw()
    };
    RawImage::new(w, h, pixels)
}

/// Lossless PNG encoding of an RGB image.
pub fn encode_png(img: &RawImage) -> Result<Vec<u8>, PreprocessError> {
    let buf = image::RgbImage::from_raw(img.width as u32, img.height as u32, img.pixels.clone())
        .ok_or_else(|| PreprocessError::Encode("buffer size".into()))?;
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| PreprocessError::Encode(e.to_string()))?;
    Ok(out.into_inner())
}

/// Source coordinate and interpolation taps for half-pixel-centred
/// resampling along one axis.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tap {
    pub lo: usize,
    pub hi: usize,
    pub frac: f64,
}

pub(crate) fn bilinear_taps(src: usize, dst: usize) -> Vec<Tap> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|d| {
            let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let lo = s.floor() as usize;
            let hi = (lo + 1).min(src - 1);
            Tap {
                lo,
                hi,
                frac: s - lo as f64,
            }
        })
        .collect()
}

/// Bilinear resize with half-pixel centres; source coordinates clamp at the
/// borders. Aspect ratio is not preserved.
pub fn resize_bilinear(img: &RawImage, out_w: usize, out_h: usize) -> RawImage {
    if img.width == out_w && img.height == out_h {
        return img.clone();
    }
    let xs = bilinear_taps(img.width, out_w);
    let ys = bilinear_taps(img.height, out_h);
    let mut out = Vec::with_capacity(out_w * out_h * 3);
    let row = |y: usize| &img.pixels[y * img.width * 3..(y + 1) * img.width * 3];
    for ty in &ys {
        let (r0, r1) = (row(ty.lo), row(ty.hi));
        for tx in &xs {
            for c in 0..3 {
                let top =
                    r0[tx.lo * 3 + c] as f64 * (1.0 - tx.frac) + r0[tx.hi * 3 + c] as f64 * tx.frac;
                let bot =
                    r1[tx.lo * 3 + c] as f64 * (1.0 - tx.frac) + r1[tx.hi * 3 + c] as f64 * tx.frac;
                let v = top * (1.0 - ty.frac) + bot * ty.frac;
                out.push((v + 0.5).floor().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RawImage {
        width: out_w,
        height: out_h,
        pixels: out,
    }
}

/// Scales a 256x256 image to [0,1] by dividing each byte by 255.
pub fn normalize(img: &RawImage) -> Result<ImageTensor, PreprocessError> {
    if img.width != INPUT_SIDE || img.height != INPUT_SIDE {
        return Err(PreprocessError::SizeMismatch {
            expected_w: INPUT_SIDE,
            expected_h: INPUT_SIDE,
            width: img.width,
            height: img.height,
        });
    }
    let data = img.pixels.iter().map(|&p| p as f32 / 255.0).collect();
    let t = TensorF32::new(vec![INPUT_SIDE, INPUT_SIDE, INPUT_CHANNELS], data).expect("sized");
    Ok(ImageTensor(t))
}

/// Resize and normalize an already-decoded image.
pub fn prepare(img: &RawImage) -> ImageTensor {
    normalize(&resize_bilinear(img, INPUT_SIDE, INPUT_SIDE)).expect("resized to input size")
}

/// decode → resize → normalize.
pub fn preprocess(bytes: &[u8]) -> Result<ImageTensor, PreprocessError> {
    Ok(prepare(&decode_image(bytes)?))
}
