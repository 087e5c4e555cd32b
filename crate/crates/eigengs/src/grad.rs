//! Analytic backward pass for both render modes under mean-squared error,
//! plus the central-difference harness that gates it.
//!
//! Gradients are exact derivatives of the rendered loss, including the
//! logistic position map and the exponential-diagonal factor map. The
//! [`SIGMA_CUT`] gate is hard in both directions: a Gaussian-pixel pair past
//! the cutoff contributes neither value nor gradient. Accumulation runs
//! per tile row into private f64 buffers merged in fixed order, so results
//! do not depend on thread scheduling.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{ColorSpace, PlanarImage};
use crate::splat::{
    bin_tiles, footprints, render_field, sigmoid, EigenGaussianModel, Footprint, Gaussian2D,
    ImageGaussianSet, TileGrid, SIGMA_CUT, TILE,
};

/// Parameter gradients mirroring the parameter set shapes.
#[derive(Debug, Clone)]
pub struct GradBuffers {
    /// `n × 2`, raw position parameters.
    pub d_pos: Vec<f32>,
    /// `n × 3`, raw factor parameters.
    pub d_fac: Vec<f32>,
    /// Same layout as the weight tensor it differentiates.
    pub d_weights: Vec<f32>,
}

/// Which Gaussian partition keeps zero gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Freeze {
    None,
    FreezeLow,
    FreezeHigh,
}

fn check_targets(model: &EigenGaussianModel, targets: &[PlanarImage]) -> Result<()> {
    if targets.len() != model.k() {
        return Err(Error::ShapeError(format!(
            "got {} targets for a k = {} model",
            targets.len(),
            model.k()
        )));
    }
    for (j, t) in targets.iter().enumerate() {
        if t.shape() != (model.width(), model.height(), model.channels()) {
            return Err(Error::ShapeError(format!(
                "target {j} has shape {:?}, model expects ({}, {}, {})",
                t.shape(),
                model.width(),
                model.height(),
                model.channels()
            )));
        }
    }
    Ok(())
}

fn concat_targets(targets: &[PlanarImage]) -> Vec<f32> {
    let mut out = Vec::with_capacity(targets.iter().map(|t| t.sample_count()).sum());
    for t in targets {
        out.extend_from_slice(t.data());
    }
    out
}

/// Forward-only loss for the eigen mode; shares nothing with the gradient
/// accumulation below, which makes it the evaluation half of the
/// finite-difference check.
pub fn loss_components(model: &EigenGaussianModel, targets: &[PlanarImage]) -> Result<f64> {
    check_targets(model, targets)?;
    let (w, h) = (model.width(), model.height());
    let outputs = model.k() * model.channels();
    let fps = footprints(model.gaussians(), w, h);
    let grid = bin_tiles(&fps, w, h);
    let field = render_field(&fps, &grid, 0..model.n_gaussians(), model.weights(), outputs, w, h);
    let target = concat_targets(targets);
    Ok(mse_smooth(&field, &target))
}

/// Forward-only loss for the image mode.
pub fn loss_image(set: &ImageGaussianSet, target: &PlanarImage) -> Result<f64> {
    if target.shape() != set.shape() {
        return Err(Error::ShapeError(format!(
            "target shape {:?} does not match set shape {:?}",
            target.shape(),
            set.shape()
        )));
    }
    let (w, h, c) = set.shape();
    let fps = footprints(set.gaussians(), w, h);
    let grid = bin_tiles(&fps, w, h);
    let mut field = render_field(&fps, &grid, 0..set.gaussians().len(), set.weights(), c, w, h);
    for (acc, &mu) in field.iter_mut().zip(set.mean().data()) {
        *acc += mu as f64;
    }
    Ok(mse_smooth(&field, target.data()))
}

/// Smooth f64 mean-squared error; the evaluation route for the
/// finite-difference harness, where quantization noise would drown small
/// derivatives.
fn mse_smooth(pred: &[f64], target: &[f32]) -> f64 {
    let inv = 1.0 / pred.len() as f64;
    pred.iter().zip(target).map(|(&p, &t)| (p - t as f64) * (p - t as f64)).sum::<f64>() * inv
}

/// Loss as the backward pass reports it: the prediction is rounded through
/// f32 (what the public render returns), so a target equal to the current
/// render yields exactly zero loss and, via the same residuals, exactly
/// zero gradients. Differs from [`mse_smooth`] only at f32 rounding order.
fn mse_rounded(pred: &[f64], target: &[f32]) -> f64 {
    let inv = 1.0 / pred.len() as f64;
    pred.iter()
        .zip(target)
        .map(|(&p, &t)| {
            let d = p as f32 as f64 - t as f64;
            d * d
        })
        .sum::<f64>()
        * inv
}

/// Loss and gradients of the eigen-mode render against the component
/// targets. The loss averages over components, pixels, and channels.
pub fn backward_components(
    model: &EigenGaussianModel,
    targets: &[PlanarImage],
    freeze: Freeze,
) -> Result<(f64, GradBuffers)> {
    check_targets(model, targets)?;
    let (w, h) = (model.width(), model.height());
    let n = model.n_gaussians();
    let outputs = model.k() * model.channels();
    let active = match freeze {
        Freeze::None => 0..n,
        Freeze::FreezeLow => model.n_low()..n,
        Freeze::FreezeHigh => 0..model.n_low(),
    };
    let fps = footprints(model.gaussians(), w, h);
    let grid = bin_tiles(&fps, w, h);
    let field = render_field(&fps, &grid, 0..n, model.weights(), outputs, w, h);
    let target = concat_targets(targets);
    let loss = mse_rounded(&field, &target);
    let scale = 2.0 / field.len() as f64;
    let rs: Vec<f64> = field
        .iter()
        .zip(&target)
        .map(|(&p, &t)| (p as f32 as f64 - t as f64) * scale)
        .collect();
    let grads = backward_field(
        model.gaussians(),
        &fps,
        &grid,
        active,
        model.weights(),
        outputs,
        &rs,
        w,
        h,
    );
    Ok((loss, grads))
}

/// Loss and gradients of the image-mode render against one target image.
pub fn backward_image(
    set: &ImageGaussianSet,
    target: &PlanarImage,
) -> Result<(f64, GradBuffers)> {
    if target.shape() != set.shape() {
        return Err(Error::ShapeError(format!(
            "target shape {:?} does not match set shape {:?}",
            target.shape(),
            set.shape()
        )));
    }
    let (w, h, c) = set.shape();
    let n = set.gaussians().len();
    let fps = footprints(set.gaussians(), w, h);
    let grid = bin_tiles(&fps, w, h);
    let mut field = render_field(&fps, &grid, 0..n, set.weights(), c, w, h);
    for (acc, &mu) in field.iter_mut().zip(set.mean().data()) {
        *acc += mu as f64;
    }
    let loss = mse_rounded(&field, target.data());
    let scale = 2.0 / field.len() as f64;
    let rs: Vec<f64> = field
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| (p as f32 as f64 - t as f64) * scale)
        .collect();
    let grads = backward_field(set.gaussians(), &fps, &grid, 0..n, set.weights(), c, &rs, w, h);
    Ok((loss, grads))
}

/// Accumulates gradients for Gaussians in `active` given pre-scaled
/// residuals `rs = 2 (pred - target) / M`. Tile rows run in parallel into
/// private buffers and merge in row order.
#[allow(clippy::too_many_arguments)]
fn backward_field(
    gaussians: &[Gaussian2D],
    fps: &[Footprint],
    grid: &TileGrid,
    active: std::ops::Range<usize>,
    weights: &[f32],
    outputs: usize,
    rs: &[f64],
    w: usize,
    h: usize,
) -> GradBuffers {
    let n = gaussians.len();
    // d center / d raw position, per Gaussian: canvas * s * (1 - s).
    let pos_jac: Vec<(f64, f64)> = gaussians
        .iter()
        .map(|g| {
            let sx = sigmoid(g.pos_raw[0] as f64);
            let sy = sigmoid(g.pos_raw[1] as f64);
            (w as f64 * sx * (1.0 - sx), h as f64 * sy * (1.0 - sy))
        })
        .collect();

    let bands: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..grid.tiles_y)
        .into_par_iter()
        .map(|ty| {
            let mut d_pos = vec![0.0f64; n * 2];
            let mut d_fac = vec![0.0f64; n * 3];
            let mut d_weights = vec![0.0f64; n * outputs];
            let band_y0 = ty * TILE;
            let band_y1 = (band_y0 + TILE).min(h);
            for tx in 0..grid.tiles_x {
                for &gi in &grid.lists[ty * grid.tiles_x + tx] {
                    let g = gi as usize;
                    if g < active.start || g >= active.end {
                        continue;
                    }
                    let fp = &fps[g];
                    let wg = &weights[g * outputs..(g + 1) * outputs];
                    let dw = &mut d_weights[g * outputs..(g + 1) * outputs];
                    let (jx, jy) = pos_jac[g];
                    let y_lo = fp.y0.max(band_y0);
                    let y_hi = fp.y1.min(band_y1);
                    let x_lo = fp.x0.max(tx * TILE);
                    let x_hi = fp.x1.min((tx * TILE + TILE).min(w));
                    let mut acc_px = 0.0f64;
                    let mut acc_py = 0.0f64;
                    let mut acc_a = 0.0f64;
                    let mut acc_b = 0.0f64;
                    let mut acc_c = 0.0f64;
                    for y in y_lo..y_hi {
                        let py = y as f64 + 0.5;
                        let dy = py - fp.cy;
                        for x in x_lo..x_hi {
                            let dx = x as f64 + 0.5 - fp.cx;
                            let u1 = fp.la * dx + fp.lb * dy;
                            let u2 = fp.lc * dy;
                            let sigma = 0.5 * (u1 * u1 + u2 * u2);
                            if sigma > SIGMA_CUT {
                                continue;
                            }
                            let e = (-sigma).exp();
                            let p = y * w + x;
                            let mut g_e = 0.0f64;
                            for (o, &wv) in wg.iter().enumerate() {
                                let r = rs[o * h * w + p];
                                dw[o] += r * e;
                                g_e += r * wv as f64;
                            }
                            // dL/dsigma, then chain through sigma's partials.
                            let ds = -e * g_e;
                            acc_px += ds * (u1 * fp.la);
                            acc_py += ds * (u1 * fp.lb + u2 * fp.lc);
                            acc_a += ds * (u1 * fp.la * dx);
                            acc_b += ds * (u1 * dy);
                            acc_c += ds * (u2 * fp.lc * dy);
                        }
                    }
                    // Displacement is pixel minus center, so the center
                    // derivative flips sign before the logistic jacobian.
                    d_pos[g * 2] += -acc_px * jx;
                    d_pos[g * 2 + 1] += -acc_py * jy;
                    d_fac[g * 3] += acc_a;
                    d_fac[g * 3 + 1] += acc_b;
                    d_fac[g * 3 + 2] += acc_c;
                }
            }
            (d_pos, d_fac, d_weights)
        })
        .collect();

    let mut d_pos = vec![0.0f64; n * 2];
    let mut d_fac = vec![0.0f64; n * 3];
    let mut d_weights = vec![0.0f64; n * outputs];
    for (bp, bf, bw) in &bands {
        for (a, &b) in d_pos.iter_mut().zip(bp) {
            *a += b;
        }
        for (a, &b) in d_fac.iter_mut().zip(bf) {
            *a += b;
        }
        for (a, &b) in d_weights.iter_mut().zip(bw) {
            *a += b;
        }
    }
    GradBuffers {
        d_pos: d_pos.into_iter().map(|v| v as f32).collect(),
        d_fac: d_fac.into_iter().map(|v| v as f32).collect(),
        d_weights: d_weights.into_iter().map(|v| v as f32).collect(),
    }
}

// ---------------------------------------------------------------------------
// Finite-difference harness
// ---------------------------------------------------------------------------

/// Which render mode a finite-difference instance exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdMode {
    Components,
    Image,
}

/// Recipe for a randomized small instance.
#[derive(Debug, Clone)]
pub struct FdInstanceSpec {
    pub width: usize,
    pub height: usize,
    pub n_gaussians: usize,
    pub k: usize,
    pub channels: usize,
    pub mode: FdMode,
    pub seed: u64,
}

/// A concrete instance: parameters plus matching targets.
pub enum FdInstance {
    Components { model: EigenGaussianModel, targets: Vec<PlanarImage> },
    Image { set: ImageGaussianSet, target: PlanarImage },
}

impl FdInstance {
    pub fn param_count(&self) -> usize {
        match self {
            FdInstance::Components { model, .. } => {
                model.n_gaussians() * (5 + model.k() * model.channels())
            }
            FdInstance::Image { set, .. } => {
                set.gaussians().len() * (5 + set.mean().channels())
            }
        }
    }
}

/// One compared gradient entry.
#[derive(Debug, Clone)]
pub struct FdEntry {
    pub index: usize,
    pub name: String,
    pub analytic: f64,
    pub numeric: f64,
    pub abs_dev: f64,
    pub rel_dev: f64,
}

/// Full comparison of analytic against central-difference gradients.
#[derive(Debug, Clone)]
pub struct FdReport {
    pub entries: Vec<FdEntry>,
    /// Largest absolute deviation over all entries.
    pub max_abs_dev: f64,
    /// Largest relative deviation among entries that also exceed the
    /// absolute tolerance (tiny entries compare on absolute terms only).
    pub max_rel_dev: f64,
    pub tol_rel: f64,
    pub tol_abs: f64,
}

impl FdReport {
    /// Entries that violate both tolerances.
    pub fn flagged(&self) -> Vec<&FdEntry> {
        self.entries
            .iter()
            .filter(|e| e.abs_dev > self.tol_abs && e.rel_dev > self.tol_rel)
            .collect()
    }

    pub fn passes(&self) -> bool {
        self.flagged().is_empty()
    }
}

/// Builds a deterministic random instance.
///
/// Central differences need the cutoff gate locally constant around the
/// evaluation point: a Gaussian whose sigma = SIGMA_CUT ring lies on the
/// canvas makes the loss jump by `weight * exp(-SIGMA_CUT)` whenever a
/// perturbation sweeps the ring across a pixel center, which drowns small
/// gradients. Instances therefore use Gaussians wide enough that sigma
/// stays below the cutoff everywhere on the canvas, so the gate never
/// flips. Targets come from rendering a jittered copy of the parameters,
/// which keeps residuals smooth and moderate.
pub fn build_fd_instance(spec: &FdInstanceSpec) -> FdInstance {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_gaussians;
    let short = spec.width.min(spec.height) as f64;
    let gauss = |rng: &mut rand_chacha::ChaCha8Rng| {
        // Scale >= 0.40 * short side keeps the farthest corner below
        // sigma ~ 6 for mid-canvas centers, well clear of the gate.
        let scale = rng.gen_range(0.40..0.60) * short;
        let a = (1.0 / scale).ln();
        Gaussian2D {
            pos_raw: [rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)],
            fac_raw: [
                (a + rng.gen_range(-0.1..0.1)) as f32,
                rng.gen_range(-0.04..0.04),
                (a + rng.gen_range(-0.1..0.1)) as f32,
            ],
        }
    };
    let jitter = |g: &Gaussian2D, rng: &mut rand_chacha::ChaCha8Rng| Gaussian2D {
        pos_raw: [
            g.pos_raw[0] + rng.gen_range(-0.2..0.2),
            g.pos_raw[1] + rng.gen_range(-0.2..0.2),
        ],
        fac_raw: [
            g.fac_raw[0] + rng.gen_range(-0.1..0.1),
            g.fac_raw[1] + rng.gen_range(-0.02..0.02),
            g.fac_raw[2] + rng.gen_range(-0.1..0.1),
        ],
    };
    let gaussians: Vec<Gaussian2D> = (0..n).map(|_| gauss(&mut rng)).collect();
    // Sigma is convex over the canvas, so checking the corner pixels proves
    // the gate stays open everywhere with margin for the probe steps.
    let assert_gate_clear = |gs: &[Gaussian2D]| {
        for fp in footprints(gs, spec.width, spec.height) {
            let (w, h) = (spec.width as f64, spec.height as f64);
            for (px, py) in [(0.5, 0.5), (w - 0.5, 0.5), (0.5, h - 0.5), (w - 0.5, h - 0.5)] {
                assert!(
                    fp.sigma(px, py) < SIGMA_CUT - 0.5,
                    "fd instance Gaussian reaches the cutoff gate on canvas"
                );
            }
        }
    };
    assert_gate_clear(&gaussians);
    match spec.mode {
        FdMode::Components => {
            let outputs = spec.k * spec.channels;
            let weights: Vec<f32> =
                (0..n * outputs).map(|_| rng.gen_range(-0.8..0.8)).collect();
            let model = EigenGaussianModel::new(
                gaussians.clone(),
                weights.clone(),
                0,
                0,
                spec.width,
                spec.height,
                spec.channels,
                spec.k,
                ColorSpace::Linear,
            )
            .expect("fd instance model is valid");
            let shifted: Vec<Gaussian2D> =
                gaussians.iter().map(|g| jitter(g, &mut rng)).collect();
            assert_gate_clear(&shifted);
            let shifted_weights: Vec<f32> =
                weights.iter().map(|&v| v + rng.gen_range(-0.3..0.3)).collect();
            let shadow = EigenGaussianModel::new(
                shifted,
                shifted_weights,
                0,
                0,
                spec.width,
                spec.height,
                spec.channels,
                spec.k,
                ColorSpace::Linear,
            )
            .expect("fd shadow model is valid");
            let targets = crate::splat::render_components(&shadow, crate::splat::Partition::All);
            FdInstance::Components { model, targets }
        }
        FdMode::Image => {
            let weights: Vec<f32> =
                (0..n * spec.channels).map(|_| rng.gen_range(-0.8..0.8)).collect();
            let mean_data: Vec<f32> = (0..spec.width * spec.height * spec.channels)
                .map(|_| rng.gen_range(0.2..0.8))
                .collect();
            let mean = PlanarImage::new(
                spec.width,
                spec.height,
                spec.channels,
                ColorSpace::Linear,
                mean_data,
            )
            .expect("fd mean is valid");
            let set = ImageGaussianSet::new(gaussians.clone(), weights.clone(), mean.clone())
                .expect("fd instance set is valid");
            let shifted: Vec<Gaussian2D> =
                gaussians.iter().map(|g| jitter(g, &mut rng)).collect();
            assert_gate_clear(&shifted);
            let shifted_weights: Vec<f32> =
                weights.iter().map(|&v| v + rng.gen_range(-0.3..0.3)).collect();
            let shadow = ImageGaussianSet::new(shifted, shifted_weights, mean).unwrap();
            let target = crate::splat::render_image(&shadow);
            FdInstance::Image { set, target }
        }
    }
}

/// Flattened analytic gradients in canonical order: positions, factors,
/// weights.
pub fn analytic_gradients(instance: &FdInstance) -> Vec<f64> {
    let grads = match instance {
        FdInstance::Components { model, targets } => {
            backward_components(model, targets, Freeze::None).expect("shapes match").1
        }
        FdInstance::Image { set, target } => backward_image(set, target).expect("shapes match").1,
    };
    grads
        .d_pos
        .iter()
        .chain(&grads.d_fac)
        .chain(&grads.d_weights)
        .map(|&v| v as f64)
        .collect()
}

fn param_name(index: usize, n: usize, outputs: usize) -> String {
    if index < n * 2 {
        format!("pos[{}][{}]", index / 2, index % 2)
    } else if index < n * 5 {
        let i = index - n * 2;
        format!("fac[{}][{}]", i / 3, i % 3)
    } else {
        let i = index - n * 5;
        format!("weight[{}][{}]", i / outputs, i % outputs)
    }
}

/// Evaluates the loss of an instance whose flat parameter `index` is set to
/// `value`, restoring nothing (works on a clone).
fn loss_with_param(instance: &FdInstance, index: usize, value: f32) -> f64 {
    match instance {
        FdInstance::Components { model, targets } => {
            let mut m = model.clone();
            set_flat_param_model(&mut m, index, value);
            loss_components(&m, targets).expect("shapes match")
        }
        FdInstance::Image { set, target } => {
            let mut s = set.clone();
            set_flat_param_set(&mut s, index, value);
            loss_image(&s, target).expect("shapes match")
        }
    }
}

fn get_flat_param(instance: &FdInstance, index: usize) -> f32 {
    match instance {
        FdInstance::Components { model, .. } => {
            let n = model.n_gaussians();
            let gs = model.gaussians();
            if index < n * 2 {
                gs[index / 2].pos_raw[index % 2]
            } else if index < n * 5 {
                let i = index - n * 2;
                gs[i / 3].fac_raw[i % 3]
            } else {
                model.weights()[index - n * 5]
            }
        }
        FdInstance::Image { set, .. } => {
            let n = set.gaussians().len();
            if index < n * 2 {
                set.gaussians()[index / 2].pos_raw[index % 2]
            } else if index < n * 5 {
                let i = index - n * 2;
                set.gaussians()[i / 3].fac_raw[i % 3]
            } else {
                set.weights()[index - n * 5]
            }
        }
    }
}

fn set_flat_param_model(model: &mut EigenGaussianModel, index: usize, value: f32) {
    let n = model.n_gaussians();
    let (gaussians, weights) = model.params_mut();
    if index < n * 2 {
        gaussians[index / 2].pos_raw[index % 2] = value;
    } else if index < n * 5 {
        let i = index - n * 2;
        gaussians[i / 3].fac_raw[i % 3] = value;
    } else {
        weights[index - n * 5] = value;
    }
}

fn set_flat_param_set(set: &mut ImageGaussianSet, index: usize, value: f32) {
    let n = set.gaussians().len();
    let (gaussians, weights) = set.params_mut();
    if index < n * 2 {
        gaussians[index / 2].pos_raw[index % 2] = value;
    } else if index < n * 5 {
        let i = index - n * 2;
        gaussians[i / 3].fac_raw[i % 3] = value;
    } else {
        weights[index - n * 5] = value;
    }
}

/// Central differences over every raw parameter, evaluated through the
/// forward loss only. The divisor uses the realized f32 step, not the
/// nominal epsilon, so parameter quantization does not bias the estimate.
pub fn numeric_gradients(instance: &FdInstance, eps: f64) -> Vec<f64> {
    let count = instance.param_count();
    (0..count)
        .map(|i| {
            let p0 = get_flat_param(instance, i);
            let plus = (p0 as f64 + eps) as f32;
            let minus = (p0 as f64 - eps) as f32;
            let lp = loss_with_param(instance, i, plus);
            let lm = loss_with_param(instance, i, minus);
            (lp - lm) / (plus as f64 - minus as f64)
        })
        .collect()
}

/// Pairs up analytic and numeric values into a report.
pub fn compare_gradients(
    instance: &FdInstance,
    analytic: &[f64],
    numeric: &[f64],
    tol_rel: f64,
    tol_abs: f64,
) -> FdReport {
    assert_eq!(analytic.len(), numeric.len());
    let (n, outputs) = match instance {
        FdInstance::Components { model, .. } => {
            (model.n_gaussians(), model.k() * model.channels())
        }
        FdInstance::Image { set, .. } => (set.gaussians().len(), set.mean().channels()),
    };
    let entries: Vec<FdEntry> = analytic
        .iter()
        .zip(numeric)
        .enumerate()
        .map(|(i, (&a, &m))| {
            let abs_dev = (a - m).abs();
            let denom = a.abs().max(m.abs());
            let rel_dev = if denom == 0.0 { 0.0 } else { abs_dev / denom };
            FdEntry { index: i, name: param_name(i, n, outputs), analytic: a, numeric: m, abs_dev, rel_dev }
        })
        .collect();
    let max_abs_dev = entries.iter().map(|e| e.abs_dev).fold(0.0, f64::max);
    let max_rel_dev = entries
        .iter()
        .filter(|e| e.abs_dev > tol_abs)
        .map(|e| e.rel_dev)
        .fold(0.0, f64::max);
    FdReport { entries, max_abs_dev, max_rel_dev, tol_rel, tol_abs }
}

/// Builds the instance, runs both gradient routes, and reports deviations.
pub fn fd_check(spec: &FdInstanceSpec, eps: f64, tol_rel: f64, tol_abs: f64) -> FdReport {
    let instance = build_fd_instance(spec);
    let analytic = analytic_gradients(&instance);
    let numeric = numeric_gradients(&instance, eps);
    compare_gradients(&instance, &analytic, &numeric, tol_rel, tol_abs)
}
