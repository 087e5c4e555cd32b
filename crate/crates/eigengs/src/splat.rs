//! 2D Gaussian primitives and the tile-binned forward rasterizer.
//!
//! Rendering is depth-free accumulation: every Gaussian adds
//! `weight * exp(-sigma(x, y))` to the pixels it touches, where
//! `sigma = 0.5 * d^T Sigma^{-1} d` and `d` is the displacement from the
//! Gaussian center to the pixel center, in pixel units. Contributions are
//! hard-gated at [`SIGMA_CUT`]; the same gate applies in the backward pass so
//! forward, backward, and any reference evaluation agree on which pixels a
//! Gaussian touches.
//!
//! Pixels are binned into [`TILE`]`×`[`TILE`] tiles and each Gaussian is
//! walked only over the tiles its cutoff ellipse can reach. Tile rows render
//! in parallel; per-pixel accumulation order over Gaussians is ascending
//! index, so tiled output is identical to a naive per-pixel sum. A Gaussian
//! whose ellipse leaves the canvas contributes only at in-canvas pixels; the
//! clipped mass is not renormalized.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{ColorSpace, PlanarImage};

/// Gate on the Mahalanobis exponent: contributions with `sigma > SIGMA_CUT`
/// are exactly zero. 9.0 keeps everything inside ~3 standard deviations.
pub const SIGMA_CUT: f64 = 9.0;

/// Tile edge in pixels.
pub const TILE: usize = 16;

/// One 2D Gaussian in unconstrained parameters.
///
/// `pos_raw` maps to a center in `(0, 1)^2` through the per-axis logistic
/// function and scales by the canvas size at render time. `fac_raw = (a, b,
/// c)` defines the lower-triangular factor `L = [[exp(a), 0], [b, exp(c)]]`
/// of the inverse covariance `Sigma^{-1} = L L^T` in pixel units, which is
/// symmetric positive definite for every finite parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian2D {
    pub pos_raw: [f32; 2],
    pub fac_raw: [f32; 3],
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[inline]
fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

impl Gaussian2D {
    /// Places an isotropic Gaussian. `center` is in normalized `(0, 1)^2`
    /// coordinates, `scale` is the standard deviation in pixels.
    pub fn isotropic(center: (f64, f64), scale: f64) -> Self {
        assert!(center.0 > 0.0 && center.0 < 1.0 && center.1 > 0.0 && center.1 < 1.0);
        assert!(scale > 0.0);
        let a = (1.0 / scale).ln() as f32;
        Self { pos_raw: [logit(center.0) as f32, logit(center.1) as f32], fac_raw: [a, 0.0, a] }
    }

    /// Center in normalized `(0, 1)^2` coordinates.
    pub fn center(&self) -> (f64, f64) {
        (sigmoid(self.pos_raw[0] as f64), sigmoid(self.pos_raw[1] as f64))
    }

    /// Entries of `Sigma` (the covariance, in pixel units): `(xx, xy, yy)`.
    pub fn covariance(&self) -> (f64, f64, f64) {
        let la = (self.fac_raw[0] as f64).exp();
        let lb = self.fac_raw[1] as f64;
        let lc = (self.fac_raw[2] as f64).exp();
        // Sigma = (L L^T)^{-1} = L^{-T} L^{-1} with L^{-1} = [[1/la, 0], [-lb/(la lc), 1/lc]].
        let p = 1.0 / la;
        let q = -lb / (la * lc);
        let r = 1.0 / lc;
        (p * p + q * q, q * r, r * r)
    }

    /// sqrt of the larger eigenvalue of `Sigma`, i.e. the extent of the
    /// Gaussian's major axis in pixels.
    pub fn radius(&self) -> f32 {
        let (sxx, sxy, syy) = self.covariance();
        let tr = sxx + syy;
        let det = sxx * syy - sxy * sxy;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        (0.5 * (tr + disc)).sqrt() as f32
    }
}

/// Per-Gaussian render geometry: pixel-space center, factor entries, and the
/// clipped pixel bounding box of the cutoff ellipse.
#[derive(Debug, Clone)]
pub(crate) struct Footprint {
    pub cx: f64,
    pub cy: f64,
    pub la: f64,
    pub lb: f64,
    pub lc: f64,
    /// Half-open pixel ranges; empty when the ellipse misses the canvas.
    pub x0: usize,
    pub x1: usize,
    pub y0: usize,
    pub y1: usize,
}

impl Footprint {
    #[inline]
    pub fn sigma(&self, px: f64, py: f64) -> f64 {
        let dx = px - self.cx;
        let dy = py - self.cy;
        let u1 = self.la * dx + self.lb * dy;
        let u2 = self.lc * dy;
        0.5 * (u1 * u1 + u2 * u2)
    }

    pub fn is_empty(&self) -> bool {
        self.x0 >= self.x1 || self.y0 >= self.y1
    }
}

pub(crate) fn footprint(g: &Gaussian2D, w: usize, h: usize) -> Footprint {
    let cx = sigmoid(g.pos_raw[0] as f64) * w as f64;
    let cy = sigmoid(g.pos_raw[1] as f64) * h as f64;
    let la = (g.fac_raw[0] as f64).exp();
    let lb = g.fac_raw[1] as f64;
    let lc = (g.fac_raw[2] as f64).exp();
    // Conservative axis-aligned extents of the sigma = SIGMA_CUT ellipse:
    // rx^2 = 2 * cut * Sigma_xx, ry^2 = 2 * cut * Sigma_yy.
    let sxx = (1.0 + (lb / lc) * (lb / lc)) / (la * la);
    let syy = 1.0 / (lc * lc);
    let rx = (2.0 * SIGMA_CUT * sxx).sqrt();
    let ry = (2.0 * SIGMA_CUT * syy).sqrt();
    // Pixel x is sampled at x + 0.5.
    let x0 = ((cx - rx - 0.5).ceil().max(0.0)) as usize;
    let x1 = (((cx + rx - 0.5).floor() + 1.0).clamp(0.0, w as f64)) as usize;
    let y0 = ((cy - ry - 0.5).ceil().max(0.0)) as usize;
    let y1 = (((cy + ry - 0.5).floor() + 1.0).clamp(0.0, h as f64)) as usize;
    Footprint { cx, cy, la, lb, lc, x0: x0.min(w), x1, y0: y0.min(h), y1 }
}

pub(crate) fn footprints(gaussians: &[Gaussian2D], w: usize, h: usize) -> Vec<Footprint> {
    gaussians.iter().map(|g| footprint(g, w, h)).collect()
}

/// Per-tile lists of Gaussian indices, ascending within each tile.
pub(crate) struct TileGrid {
    pub tiles_x: usize,
    pub tiles_y: usize,
    pub lists: Vec<Vec<u32>>,
}

pub(crate) fn bin_tiles(fps: &[Footprint], w: usize, h: usize) -> TileGrid {
    let tiles_x = w.div_ceil(TILE);
    let tiles_y = h.div_ceil(TILE);
    let mut lists = vec![Vec::new(); tiles_x * tiles_y];
    for (idx, fp) in fps.iter().enumerate() {
        if fp.is_empty() {
            continue;
        }
        let tx0 = fp.x0 / TILE;
        let tx1 = (fp.x1 - 1) / TILE;
        let ty0 = fp.y0 / TILE;
        let ty1 = (fp.y1 - 1) / TILE;
        for ty in ty0..=ty1 {
            for tx in tx0..=tx1 {
                lists[ty * tiles_x + tx].push(idx as u32);
            }
        }
    }
    TileGrid { tiles_x, tiles_y, lists }
}

/// Accumulates `outputs` weighted fields over the canvas in f64.
///
/// `weights` holds `outputs` values per Gaussian; only Gaussians with index
/// in `range` contribute. Output layout is `[output][y][x]`.
pub(crate) fn render_field(
    fps: &[Footprint],
    grid: &TileGrid,
    range: std::ops::Range<usize>,
    weights: &[f32],
    outputs: usize,
    w: usize,
    h: usize,
) -> Vec<f64> {
    let bands: Vec<Vec<f64>> = (0..grid.tiles_y)
        .into_par_iter()
        .map(|ty| {
            let band_y0 = ty * TILE;
            let band_h = TILE.min(h - band_y0);
            let mut acc = vec![0.0f64; outputs * band_h * w];
            for tx in 0..grid.tiles_x {
                for &gi in &grid.lists[ty * grid.tiles_x + tx] {
                    let g = gi as usize;
                    if g < range.start || g >= range.end {
                        continue;
                    }
                    let fp = &fps[g];
                    let wg = &weights[g * outputs..(g + 1) * outputs];
                    let y_lo = fp.y0.max(band_y0);
                    let y_hi = fp.y1.min(band_y0 + band_h);
                    let x_lo = fp.x0.max(tx * TILE);
                    let x_hi = fp.x1.min((tx * TILE + TILE).min(w));
                    for y in y_lo..y_hi {
                        let py = y as f64 + 0.5;
                        let row = (y - band_y0) * w;
                        for x in x_lo..x_hi {
                            let sigma = fp.sigma(x as f64 + 0.5, py);
                            if sigma > SIGMA_CUT {
                                continue;
                            }
                            let e = (-sigma).exp();
                            for (o, &wv) in wg.iter().enumerate() {
                                acc[o * band_h * w + row + x] += wv as f64 * e;
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();

    let mut out = vec![0.0f64; outputs * h * w];
    for (ty, band) in bands.iter().enumerate() {
        let band_y0 = ty * TILE;
        let band_h = TILE.min(h - band_y0);
        for o in 0..outputs {
            let src = &band[o * band_h * w..(o + 1) * band_h * w];
            let dst = &mut out[o * h * w + band_y0 * w..o * h * w + (band_y0 + band_h) * w];
            dst.copy_from_slice(src);
        }
    }
    out
}

/// Which slice of the Gaussian partition to rasterize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partition {
    All,
    LowOnly,
    HighOnly,
}

/// The shared eigen-model: one Gaussian set approximating every basis
/// component at once through per-component reduced weights.
///
/// Weights are `n × k × channels`, signed and unbounded (component planes
/// have negative regions; opacity is folded in). Gaussians `[0, n_low)` form
/// the low-frequency partition and carry weights only for components
/// `[0, comp_split)`; the rest carry weights only for the remaining
/// components. Cross-partition weights are exactly zero. `n_low == 0` means
/// frequency partitioning is disabled.
#[derive(Debug, Clone)]
pub struct EigenGaussianModel {
    gaussians: Vec<Gaussian2D>,
    weights: Vec<f32>,
    n_low: usize,
    comp_split: usize,
    width: usize,
    height: usize,
    channels: usize,
    k: usize,
    space: ColorSpace,
}

impl EigenGaussianModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        gaussians: Vec<Gaussian2D>,
        weights: Vec<f32>,
        n_low: usize,
        comp_split: usize,
        width: usize,
        height: usize,
        channels: usize,
        k: usize,
        space: ColorSpace,
    ) -> Result<Self> {
        let n = gaussians.len();
        if n == 0 {
            return Err(Error::ShapeError("model needs at least one Gaussian".into()));
        }
        if weights.len() != n * k * channels {
            return Err(Error::ShapeError(format!(
                "weight tensor length {} != n({n}) * k({k}) * c({channels})",
                weights.len()
            )));
        }
        if !weights.iter().all(|v| v.is_finite()) {
            return Err(Error::ShapeError("non-finite weight".into()));
        }
        if n_low > 0 {
            if n_low >= n || comp_split == 0 || comp_split >= k {
                return Err(Error::ShapeError(format!(
                    "invalid partition n_low = {n_low} of {n}, comp_split = {comp_split} of {k}"
                )));
            }
            for g in 0..n {
                for j in 0..k {
                    let cross = (g < n_low) != (j < comp_split);
                    if cross {
                        for ch in 0..channels {
                            if weights[(g * k + j) * channels + ch] != 0.0 {
                                return Err(Error::ShapeError(format!(
                                    "cross-partition weight ({g}, {j}) must be exactly zero"
                                )));
                            }
                        }
                    }
                }
            }
        } else if comp_split != 0 {
            return Err(Error::ShapeError("comp_split requires n_low > 0".into()));
        }
        Ok(Self { gaussians, weights, n_low, comp_split, width, height, channels, k, space })
    }

    pub fn gaussians(&self) -> &[Gaussian2D] {
        &self.gaussians
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    /// Weight of Gaussian `g` for component `j`, channel `ch`.
    pub fn weight(&self, g: usize, j: usize, ch: usize) -> f32 {
        self.weights[(g * self.k + j) * self.channels + ch]
    }

    pub fn n_gaussians(&self) -> usize {
        self.gaussians.len()
    }

    pub fn n_low(&self) -> usize {
        self.n_low
    }

    pub fn comp_split(&self) -> usize {
        self.comp_split
    }

    pub fn k(&self) -> usize {
        self.k
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

    /// `(width, height, channels, k)`.
    pub fn basis_shape(&self) -> (usize, usize, usize, usize) {
        (self.width, self.height, self.channels, self.k)
    }

    fn partition_range(&self, subset: Partition) -> std::ops::Range<usize> {
        match subset {
            Partition::All => 0..self.gaussians.len(),
            Partition::LowOnly => 0..self.n_low,
            Partition::HighOnly => self.n_low..self.gaussians.len(),
        }
    }

    /// Raw mutable access for the trainer and the gradient harness. Callers
    /// must preserve the partition zero structure.
    pub(crate) fn params_mut(&mut self) -> (&mut [Gaussian2D], &mut [f32]) {
        (&mut self.gaussians, &mut self.weights)
    }
}

/// One image's Gaussian set: shared geometry with per-channel collapsed
/// weights, rendered on top of the basis mean.
#[derive(Debug, Clone)]
pub struct ImageGaussianSet {
    gaussians: Vec<Gaussian2D>,
    weights: Vec<f32>,
    mean: PlanarImage,
}

impl ImageGaussianSet {
    pub fn new(gaussians: Vec<Gaussian2D>, weights: Vec<f32>, mean: PlanarImage) -> Result<Self> {
        if gaussians.is_empty() {
            return Err(Error::ShapeError("image set needs at least one Gaussian".into()));
        }
        if weights.len() != gaussians.len() * mean.channels() {
            return Err(Error::ShapeError(format!(
                "weights length {} != n({}) * c({})",
                weights.len(),
                gaussians.len(),
                mean.channels()
            )));
        }
        if !weights.iter().all(|v| v.is_finite()) {
            return Err(Error::ShapeError("non-finite weight".into()));
        }
        Ok(Self { gaussians, weights, mean })
    }

    pub fn gaussians(&self) -> &[Gaussian2D] {
        &self.gaussians
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn mean(&self) -> &PlanarImage {
        &self.mean
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.mean.shape()
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [Gaussian2D], &mut [f32]) {
        (&mut self.gaussians, &mut self.weights)
    }
}

/// Rasterizes every component approximation of the model, one image per
/// component. Pixel values are raw accumulated sums, unclamped.
pub fn render_components(model: &EigenGaussianModel, subset: Partition) -> Vec<PlanarImage> {
    let (w, h) = (model.width, model.height);
    let outputs = model.k * model.channels;
    let fps = footprints(&model.gaussians, w, h);
    let grid = bin_tiles(&fps, w, h);
    let field =
        render_field(&fps, &grid, model.partition_range(subset), &model.weights, outputs, w, h);
    (0..model.k)
        .map(|j| {
            let start = j * model.channels * h * w;
            let data: Vec<f32> =
                field[start..start + model.channels * h * w].iter().map(|&v| v as f32).collect();
            PlanarImage::new(w, h, model.channels, model.space, data)
                .expect("render produces finite samples")
        })
        .collect()
}

/// Rasterizes an image set: mean plus the weighted Gaussian sum, unclamped.
pub fn render_image(set: &ImageGaussianSet) -> PlanarImage {
    let (w, h, c) = set.shape();
    let fps = footprints(&set.gaussians, w, h);
    let grid = bin_tiles(&fps, w, h);
    let field = render_field(&fps, &grid, 0..set.gaussians.len(), &set.weights, c, w, h);
    let data: Vec<f32> = set
        .mean
        .data()
        .iter()
        .zip(&field)
        .map(|(&mu, &v)| ((mu as f64) + v) as f32)
        .collect();
    PlanarImage::new(w, h, c, set.mean.space(), data).expect("render produces finite samples")
}

/// Major-axis extent of every Gaussian in pixels, model order.
pub fn gaussian_radii(model: &EigenGaussianModel) -> Vec<f32> {
    model.gaussians.iter().map(Gaussian2D::radius).collect()
}
