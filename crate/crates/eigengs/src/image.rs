//! Image buffers, corpus ingestion, and PNG I/O.
//!
//! All pixel data is `f32` in nominal `[0, 1]`, stored channel-planar:
//! sample `(x, y, c)` lives at `(c * height + y) * width + x`. Values may
//! leave `[0, 1]` in intermediate stages (eigenbasis reconstructions rely on
//! that headroom); clamping happens once, at final display conversion.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::color;
use crate::error::{Error, Result};

/// Color space tag carried by every [`PlanarImage`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorSpace {
    /// Single-channel intensity (or raw component planes).
    Linear,
    /// Display RGB as decoded from PNG.
    Rgb,
    /// BT.601 studio-range luma/chroma, see [`color`].
    YCbCr,
}

impl ColorSpace {
    pub fn tag(self) -> u8 {
        match self {
            ColorSpace::Linear => 0,
            ColorSpace::Rgb => 1,
            ColorSpace::YCbCr => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(ColorSpace::Linear),
            1 => Some(ColorSpace::Rgb),
            2 => Some(ColorSpace::YCbCr),
            _ => None,
        }
    }
}

/// An `width × height × channels` float image in a declared color space.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarImage {
    width: usize,
    height: usize,
    channels: usize,
    space: ColorSpace,
    data: Vec<f32>,
}

impl PlanarImage {
    /// Wraps channel-planar sample data. `data.len()` must be
    /// `width * height * channels` and every sample finite.
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        space: ColorSpace,
        data: Vec<f32>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ShapeError(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::ChannelMismatch { expected: 3, got: channels });
        }
        if data.len() != width * height * channels {
            return Err(Error::ShapeError(format!(
                "data length {} != {}x{}x{}",
                data.len(),
                width,
                height,
                channels
            )));
        }
        if !data.iter().all(|s| s.is_finite()) {
            return Err(Error::ShapeError("non-finite sample".into()));
        }
        Ok(Self { width, height, channels, space, data })
    }

    pub fn zeros(width: usize, height: usize, channels: usize, space: ColorSpace) -> Self {
        Self { width, height, channels, space, data: vec![0.0; width * height * channels] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    /// `(width, height, channels)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    /// Total sample count `width * height * channels`.
    pub fn sample_count(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    /// One channel plane, `height * width` samples.
    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f32) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    pub(crate) fn with_space(mut self, space: ColorSpace) -> Self {
        self.space = space;
        self
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.shape() == other.shape() && self.space == other.space
    }

    /// Bilinear resample to `(width, height)` with edge clamping.
    ///
    /// Destination pixel centers map to source coordinates via
    /// `sx = (dx + 0.5) * sw / dw - 0.5`; the four neighbours are clamped to
    /// the canvas before interpolation.
    pub fn resize_bilinear(&self, width: usize, height: usize) -> Self {
        if (width, height) == (self.width, self.height) {
            return self.clone();
        }
        let sx_scale = self.width as f64 / width as f64;
        let sy_scale = self.height as f64 / height as f64;
        let mut data = vec![0.0f32; width * height * self.channels];
        for c in 0..self.channels {
            let src = self.plane(c);
            let dst = &mut data[c * width * height..(c + 1) * width * height];
            for dy in 0..height {
                let sy = (dy as f64 + 0.5) * sy_scale - 0.5;
                let y0 = sy.floor();
                let ty = sy - y0;
                let y0c = (y0 as i64).clamp(0, self.height as i64 - 1) as usize;
                let y1c = (y0 as i64 + 1).clamp(0, self.height as i64 - 1) as usize;
                for dx in 0..width {
                    let sx = (dx as f64 + 0.5) * sx_scale - 0.5;
                    let x0 = sx.floor();
                    let tx = sx - x0;
                    let x0c = (x0 as i64).clamp(0, self.width as i64 - 1) as usize;
                    let x1c = (x0 as i64 + 1).clamp(0, self.width as i64 - 1) as usize;
                    let v00 = src[y0c * self.width + x0c] as f64;
                    let v01 = src[y0c * self.width + x1c] as f64;
                    let v10 = src[y1c * self.width + x0c] as f64;
                    let v11 = src[y1c * self.width + x1c] as f64;
                    let top = v00 + (v01 - v00) * tx;
                    let bot = v10 + (v11 - v10) * tx;
                    dst[dy * width + dx] = (top + (bot - top) * ty) as f32;
                }
            }
        }
        Self { width, height, channels: self.channels, space: self.space, data }
    }

    /// Converts to the requested color space, expanding or collapsing
    /// channels as needed. Grayscale → color replicates the plane; color →
    /// grayscale takes BT.601 luma.
    pub fn convert_to(&self, space: ColorSpace) -> Result<Self> {
        match (self.space, space) {
            (a, b) if a == b => Ok(self.clone()),
            (ColorSpace::Rgb, ColorSpace::YCbCr) => color::rgb_to_ycbcr(self),
            (ColorSpace::YCbCr, ColorSpace::Rgb) => color::ycbcr_to_rgb(self),
            (ColorSpace::Linear, ColorSpace::Rgb) => Ok(self.replicate_gray().with_space(ColorSpace::Rgb)),
            (ColorSpace::Linear, ColorSpace::YCbCr) => {
                color::rgb_to_ycbcr(&self.replicate_gray().with_space(ColorSpace::Rgb))
            }
            (ColorSpace::Rgb, ColorSpace::Linear) => Ok(self.luma().with_space(ColorSpace::Linear)),
            (ColorSpace::YCbCr, ColorSpace::Linear) => {
                Ok(color::ycbcr_to_rgb(self)?.luma().with_space(ColorSpace::Linear))
            }
            (a, b) => Err(Error::ShapeError(format!("unsupported conversion {a:?} -> {b:?}"))),
        }
    }

    fn replicate_gray(&self) -> Self {
        assert_eq!(self.channels, 1);
        let mut data = Vec::with_capacity(self.data.len() * 3);
        for _ in 0..3 {
            data.extend_from_slice(&self.data);
        }
        Self { width: self.width, height: self.height, channels: 3, space: self.space, data }
    }

    fn luma(&self) -> Self {
        assert_eq!(self.channels, 3);
        let n = self.width * self.height;
        let (r, g, b) = (self.plane(0), self.plane(1), self.plane(2));
        let data = (0..n)
            .map(|i| {
                (color::KR * r[i] as f64 + color::KG * g[i] as f64 + color::KB * b[i] as f64) as f32
            })
            .collect();
        Self { width: self.width, height: self.height, channels: 1, space: self.space, data }
    }
}

/// A set of shape-identical training images.
#[derive(Debug, Clone)]
pub struct ImageCorpus {
    images: Vec<PlanarImage>,
}

impl ImageCorpus {
    /// Requires at least two images, all shape- and space-identical.
    pub fn new(images: Vec<PlanarImage>) -> Result<Self> {
        if images.len() < 2 {
            return Err(Error::CorpusEmpty { dir: PathBuf::new(), found: images.len() });
        }
        let first = images[0].shape();
        let space = images[0].space();
        for (i, img) in images.iter().enumerate() {
            if img.shape() != first || img.space() != space {
                return Err(Error::ShapeError(format!(
                    "corpus image {i} has shape {:?}/{:?}, expected {:?}/{:?}",
                    img.shape(),
                    img.space(),
                    first,
                    space
                )));
            }
        }
        Ok(Self { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[PlanarImage] {
        &self.images
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.images[0].shape()
    }

    pub fn space(&self) -> ColorSpace {
        self.images[0].space()
    }
}

/// Decodes one PNG into the requested color space at its native size.
///
/// 8- and 16-bit inputs are normalized to `[0, 1]`; alpha is dropped.
pub fn load_image(path: &Path, space: ColorSpace) -> Result<PlanarImage> {
    let dynamic = image::open(path)
        .map_err(|e| Error::Png { path: path.to_path_buf(), reason: e.to_string() })?;
    let decoded = match space {
        ColorSpace::Linear => {
            let gray = dynamic.to_luma32f();
            let (w, h) = (gray.width() as usize, gray.height() as usize);
            PlanarImage::new(w, h, 1, ColorSpace::Linear, gray.into_raw())?
        }
        ColorSpace::Rgb | ColorSpace::YCbCr => {
            let rgb = dynamic.to_rgb32f();
            let (w, h) = (rgb.width() as usize, rgb.height() as usize);
            let interleaved = rgb.into_raw();
            let n = w * h;
            let mut data = vec![0.0f32; n * 3];
            for i in 0..n {
                data[i] = interleaved[i * 3];
                data[n + i] = interleaved[i * 3 + 1];
                data[2 * n + i] = interleaved[i * 3 + 2];
            }
            PlanarImage::new(w, h, 3, ColorSpace::Rgb, data)?
        }
    };
    decoded.convert_to(space)
}

/// Quantizes a sample for 8-bit export: clamp then round half up.
pub fn quantize_u8(v: f32) -> u8 {
    let clamped = v.clamp(0.0, 1.0);
    let scaled = (clamped as f64 * 255.0 + 0.5).floor();
    scaled.min(255.0) as u8
}

/// Writes a PNG. YCbCr images are converted back to RGB first; everything is
/// clamped to `[0, 1]` and rounded half-up to 8 bits.
pub fn save_png(path: &Path, img: &PlanarImage) -> Result<()> {
    let display = color::to_display(img)?;
    let (w, h, c) = display.shape();
    let n = w * h;
    let (bytes, color_type) = match c {
        1 => (display.plane(0).iter().map(|&v| quantize_u8(v)).collect::<Vec<u8>>(), image::ExtendedColorType::L8),
        3 => {
            let (r, g, b) = (display.plane(0), display.plane(1), display.plane(2));
            let mut bytes = Vec::with_capacity(n * 3);
            for i in 0..n {
                bytes.push(quantize_u8(r[i]));
                bytes.push(quantize_u8(g[i]));
                bytes.push(quantize_u8(b[i]));
            }
            (bytes, image::ExtendedColorType::Rgb8)
        }
        _ => unreachable!("channel count validated at construction"),
    };
    image::save_buffer(path, &bytes, w as u32, h as u32, color_type)
        .map_err(|e| Error::Png { path: path.to_path_buf(), reason: e.to_string() })
}

/// Loads every decodable PNG under `dir`, resized to `target` and converted
/// to `space`. Files are processed in lexicographic name order; undecodable
/// files are skipped with a warning on stderr.
pub fn load_corpus(dir: &Path, target: (usize, usize), space: ColorSpace) -> Result<ImageCorpus> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .map(|ext| ext.to_string_lossy().eq_ignore_ascii_case("png"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if paths.is_empty() {
        return Err(Error::CorpusEmpty { dir: dir.to_path_buf(), found: 0 });
    }

    let (tw, th) = target;
    let decoded: Vec<Option<PlanarImage>> = paths
        .par_iter()
        .map(|path| match load_image(path, space) {
            Ok(img) => Some(img.resize_bilinear(tw, th)),
            Err(e) => {
                eprintln!("warning: skipping {}: {e}", path.display());
                None
            }
        })
        .collect();
    let images: Vec<PlanarImage> = decoded.into_iter().flatten().collect();
    if images.len() < 2 {
        return Err(Error::CorpusEmpty { dir: dir.to_path_buf(), found: images.len() });
    }
    ImageCorpus::new(images)
}
