//! The `.egs1` model file: basis and Gaussian model bundled in one
//! little-endian binary with a trailing CRC32.
//!
//! Layout:
//!
//! ```text
//! magic            4 bytes  "EGS1"
//! format_version   u32
//! width, height    u32, u32
//! channels         u32
//! k                u32      basis components
//! n                u32      Gaussians
//! n_low            u32      low-frequency partition size (0 = disabled)
//! k_low            u32      low-frequency component count
//! space            u8       0 linear, 1 rgb, 2 ycbcr
//! mean             f32 * (w*h*c)
//! components       f32 * (k * w*h*c)
//! eigenvalues      f64 * k
//! pos_raw          f32 * (n * 2)
//! fac_raw          f32 * (n * 3)
//! weights          f32 * (n * k * c)
//! crc32            u32      over every preceding byte
//! ```
//!
//! Save → load → save reproduces the file byte for byte.

use std::io::Write;
use std::path::Path;

use crate::basis::Eigenbasis;
use crate::error::{Error, Result};
use crate::image::{ColorSpace, PlanarImage};
use crate::splat::{EigenGaussianModel, Gaussian2D};

const MAGIC: &[u8; 4] = b"EGS1";
const FORMAT_VERSION: u32 = 1;

/// A loaded model file: the basis plus the trained Gaussian model.
pub struct SavedModel {
    pub basis: Eigenbasis,
    pub model: EigenGaussianModel,
}

pub fn save(path: &Path, basis: &Eigenbasis, model: &EigenGaussianModel) -> Result<()> {
    let (w, h, c) = basis.shape();
    if (w, h, c, basis.k()) != model.basis_shape() {
        return Err(Error::ShapeError(format!(
            "basis ({w}, {h}, {c}, {}) does not match model {:?}",
            basis.k(),
            model.basis_shape()
        )));
    }
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    for v in [w, h, c, basis.k(), model.n_gaussians(), model.n_low(), model.comp_split()] {
        buf.extend_from_slice(&(v as u32).to_le_bytes());
    }
    buf.push(model.space().tag());
    for &v in basis.mean().data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for &v in basis.components_flat() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for &v in basis.eigenvalues() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for g in model.gaussians() {
        buf.extend_from_slice(&g.pos_raw[0].to_le_bytes());
        buf.extend_from_slice(&g.pos_raw[1].to_le_bytes());
    }
    for g in model.gaussians() {
        for &v in &g.fac_raw {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    for &v in model.weights() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.bytes.len() {
            return Err(Error::ModelFormat("truncated file".into()));
        }
        let out = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn f32_vec(&mut self, count: usize) -> Result<Vec<f32>> {
        let raw = self.take(count * 4)?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn f64_vec(&mut self, count: usize) -> Result<Vec<f64>> {
        let raw = self.take(count * 8)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn load(path: &Path) -> Result<SavedModel> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 4 + 4 + 7 * 4 + 1 + 4 {
        return Err(Error::ModelFormat("file too short".into()));
    }
    let (payload, crc_bytes) = bytes.split_at(bytes.len() - 4);
    let stored_crc = u32::from_le_bytes(crc_bytes.try_into().unwrap());
    let computed = crc32fast::hash(payload);
    if stored_crc != computed {
        return Err(Error::ModelFormat(format!(
            "crc mismatch: stored {stored_crc:#010x}, computed {computed:#010x}"
        )));
    }
    let mut r = Reader { bytes: payload, at: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::ModelFormat("bad magic".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::ModelFormat(format!("unsupported version {version}")));
    }
    let w = r.u32()? as usize;
    let h = r.u32()? as usize;
    let c = r.u32()? as usize;
    let k = r.u32()? as usize;
    let n = r.u32()? as usize;
    let n_low = r.u32()? as usize;
    let k_low = r.u32()? as usize;
    let space = ColorSpace::from_tag(r.u8()?)
        .ok_or_else(|| Error::ModelFormat("unknown color space tag".into()))?;
    let d = w * h * c;
    let mean_data = r.f32_vec(d)?;
    let components = r.f32_vec(k * d)?;
    let eigenvalues = r.f64_vec(k)?;
    let pos = r.f32_vec(n * 2)?;
    let fac = r.f32_vec(n * 3)?;
    let weights = r.f32_vec(n * k * c)?;
    if r.at != payload.len() {
        return Err(Error::ModelFormat(format!(
            "{} trailing bytes after payload",
            payload.len() - r.at
        )));
    }

    let mean = PlanarImage::new(w, h, c, space, mean_data)
        .map_err(|e| Error::ModelFormat(format!("mean image: {e}")))?;
    let basis = Eigenbasis::from_parts(mean, components, eigenvalues)
        .map_err(|e| Error::ModelFormat(format!("basis: {e}")))?;
    let gaussians: Vec<Gaussian2D> = (0..n)
        .map(|g| Gaussian2D {
            pos_raw: [pos[g * 2], pos[g * 2 + 1]],
            fac_raw: [fac[g * 3], fac[g * 3 + 1], fac[g * 3 + 2]],
        })
        .collect();
    let model = EigenGaussianModel::new(gaussians, weights, n_low, k_low, w, h, c, k, space)
        .map_err(|e| Error::ModelFormat(format!("model: {e}")))?;
    Ok(SavedModel { basis, model })
}
