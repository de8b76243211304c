use crate::error::{ensure_shape, invalid, Result};
use crate::tensor::{Complex64, ComplexImage, RealImage};

use super::operator::{lowpass_image, MultiCoilKSpace};

/// Per-coil complex sensitivity maps, pixelwise normalized so that
/// `Σ_q |S_q|² = 1` wherever the low-pass signal is nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct SensitivityMaps {
    maps: Vec<ComplexImage>,
}

impl SensitivityMaps {
    pub fn new(maps: Vec<ComplexImage>) -> Result<Self> {
        let first = maps.first().ok_or_else(|| invalid("at least one sensitivity map is required"))?;
        let shape = first.shape();
        for m in &maps {
            ensure_shape(shape, m.shape())?;
        }
        Ok(Self { maps })
    }

    /// Single coil with unit sensitivity.
    pub fn unit(height: usize, width: usize) -> Self {
        Self { maps: vec![ComplexImage::filled(height, width, Complex64::new(1.0, 0.0))] }
    }

    pub fn num_coils(&self) -> usize {
        self.maps.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.maps[0].shape()
    }

    pub fn maps(&self) -> &[ComplexImage] {
        &self.maps
    }

    /// Pixelwise `Σ_q |S_q|²`.
    pub fn energy(&self) -> RealImage {
        let (h, w) = self.shape();
        let mut out = RealImage::zeros(h, w);
        for m in &self.maps {
            for (o, v) in out.data_mut().iter_mut().zip(m.data()) {
                *o += v.norm_sqr();
            }
        }
        out
    }
}

/// Low-pass coil images normalized by their root-sum-of-squares.
///
/// Pixels whose combined low-pass magnitude is at or below
/// `1e-12 × max` get zero sensitivity in every coil.
pub fn estimate_sensitivities(ksp: &MultiCoilKSpace) -> Result<SensitivityMaps> {
    let lowpass = lowpass_image(ksp)?;
    let rss = rss_combine(&lowpass)?;
    let floor = 1e-12 * rss.max();
    let maps = lowpass
        .iter()
        .map(|img| {
            img.zip_with(&ComplexImage::from_real(&rss), |v, d| {
                if d.re > floor && d.re > 0.0 {
                    v / d.re
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SensitivityMaps::new(maps)
}

/// Coil images `S_q ⊙ x`.
pub fn sense_expand(x: &ComplexImage, maps: &SensitivityMaps) -> Result<Vec<ComplexImage>> {
    ensure_shape(maps.shape(), x.shape())?;
    maps.maps.iter().map(|s| s.mul(x)).collect()
}

/// Adjoint of [`sense_expand`]: `Σ_q conj(S_q) ⊙ z_q`.
pub fn sense_reduce(coil_images: &[ComplexImage], maps: &SensitivityMaps) -> Result<ComplexImage> {
    if coil_images.len() != maps.num_coils() {
        return Err(invalid(format!("{} coil images for {} sensitivity maps", coil_images.len(), maps.num_coils())));
    }
    let (h, w) = maps.shape();
    let mut out = ComplexImage::zeros(h, w);
    for (z, s) in coil_images.iter().zip(&maps.maps) {
        ensure_shape((h, w), z.shape())?;
        for ((o, zv), sv) in out.data_mut().iter_mut().zip(z.data()).zip(s.data()) {
            *o += sv.conj() * zv;
        }
    }
    Ok(out)
}

/// Root-sum-of-squares magnitude combination.
pub fn rss_combine(coil_images: &[ComplexImage]) -> Result<RealImage> {
    let first = coil_images.first().ok_or_else(|| invalid("rss of zero coils"))?;
    let (h, w) = first.shape();
    let mut acc = RealImage::zeros(h, w);
    for z in coil_images {
        ensure_shape((h, w), z.shape())?;
        for (a, v) in acc.data_mut().iter_mut().zip(z.data()) {
            *a += v.norm_sqr();
        }
    }
    Ok(acc.map(f64::sqrt))
}
