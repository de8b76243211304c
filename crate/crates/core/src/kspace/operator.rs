use crate::error::{ensure_shape, invalid, Result};
use crate::tensor::{fft2c, ifft2c, Complex64, ComplexImage};

use super::coils::{estimate_sensitivities, sense_expand, sense_reduce, SensitivityMaps};
use super::mask::SamplingMask;

/// Per-coil k-space planes sharing one sampling mask.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiCoilKSpace {
    planes: Vec<ComplexImage>,
    mask: SamplingMask,
}

impl MultiCoilKSpace {
    pub fn new(planes: Vec<ComplexImage>, mask: SamplingMask) -> Result<Self> {
        let first = planes.first().ok_or_else(|| invalid("k-space needs at least one coil"))?;
        let shape = first.shape();
        for p in &planes {
            ensure_shape(shape, p.shape())?;
        }
        if mask.width != shape.1 || mask.keep.len() != shape.1 {
            return Err(invalid(format!("mask width {} does not match {} k-space columns", mask.width, shape.1)));
        }
        Ok(Self { planes, mask })
    }

    pub fn planes(&self) -> &[ComplexImage] {
        &self.planes
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn num_coils(&self) -> usize {
        self.planes.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.planes[0].shape()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.planes.iter().map(ComplexImage::norm_sqr).sum()
    }

    pub fn into_parts(self) -> (Vec<ComplexImage>, SamplingMask) {
        (self.planes, self.mask)
    }
}

fn mask_plane(plane: &ComplexImage, keep: &[bool]) -> ComplexImage {
    let w = plane.width();
    let mut out = plane.clone();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        if !keep[i % w] {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    out
}

/// Zeroes every dropped column of every coil. Idempotent.
pub fn apply_mask(ksp: &MultiCoilKSpace) -> MultiCoilKSpace {
    let planes = ksp.planes.iter().map(|p| mask_plane(p, &ksp.mask.keep)).collect();
    MultiCoilKSpace { planes, mask: ksp.mask.clone() }
}

/// Per-coil images from the fully sampled center region only.
pub fn lowpass_image(ksp: &MultiCoilKSpace) -> Result<Vec<ComplexImage>> {
    let center = ksp.mask.fully_sampled_center();
    if center.is_empty() {
        return Err(invalid("mask has no fully sampled center block"));
    }
    let keep: Vec<bool> = (0..ksp.mask.width).map(|c| center.contains(&c)).collect();
    ksp.planes.iter().map(|p| ifft2c(&mask_plane(p, &keep))).collect()
}

/// `x₀`: per-coil inverse transform of the masked data, SENSE-combined with
/// maps estimated from the same data. Single-coil data is returned as-is.
pub fn zero_filled_recon(ksp: &MultiCoilKSpace) -> Result<ComplexImage> {
    let op = SenseOperator::for_kspace(ksp)?;
    op.adjoint(ksp.planes())
}

/// Masked multi-coil encoding `A = M · F · S`.
///
/// With no maps (single-coil) the coil stage is the identity.
#[derive(Clone, Debug)]
pub struct SenseOperator {
    keep: Vec<bool>,
    maps: Option<SensitivityMaps>,
    shape: (usize, usize),
}

impl SenseOperator {
    pub fn new(mask: &SamplingMask, maps: Option<SensitivityMaps>, shape: (usize, usize)) -> Result<Self> {
        if mask.width != shape.1 {
            return Err(invalid(format!("mask width {} does not match image width {}", mask.width, shape.1)));
        }
        if let Some(m) = &maps {
            ensure_shape(shape, m.shape())?;
        }
        Ok(Self { keep: mask.keep.clone(), maps, shape })
    }

    /// Encoding for measured data: sensitivities are estimated when there is more than one coil.
    pub fn for_kspace(ksp: &MultiCoilKSpace) -> Result<Self> {
        let maps = if ksp.num_coils() > 1 { Some(estimate_sensitivities(ksp)?) } else { None };
        Self::new(ksp.mask(), maps, ksp.shape())
    }

    pub fn num_coils(&self) -> usize {
        self.maps.as_ref().map_or(1, SensitivityMaps::num_coils)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn maps(&self) -> Option<&SensitivityMaps> {
        self.maps.as_ref()
    }

    /// `M F (S_q x)` for every coil.
    pub fn forward(&self, x: &ComplexImage) -> Result<Vec<ComplexImage>> {
        ensure_shape(self.shape, x.shape())?;
        let coils = match &self.maps {
            Some(maps) => sense_expand(x, maps)?,
            None => vec![x.clone()],
        };
        coils.iter().map(|c| Ok(mask_plane(&fft2c(c)?, &self.keep))).collect()
    }

    /// `Σ_q conj(S_q) F⁻¹ M k_q`.
    pub fn adjoint(&self, kspace: &[ComplexImage]) -> Result<ComplexImage> {
        if kspace.len() != self.num_coils() {
            return Err(invalid(format!("{} k-space planes for a {}-coil operator", kspace.len(), self.num_coils())));
        }
        let images = kspace
            .iter()
            .map(|k| {
                ensure_shape(self.shape, k.shape())?;
                ifft2c(&mask_plane(k, &self.keep))
            })
            .collect::<Result<Vec<_>>>()?;
        match &self.maps {
            Some(maps) => sense_reduce(&images, maps),
            None => Ok(images.into_iter().next().expect("one coil")),
        }
    }

    /// `Aᴴ M A x`.
    pub fn normal(&self, x: &ComplexImage) -> Result<ComplexImage> {
        self.adjoint(&self.forward(x)?)
    }

    /// Per-coil k-space residual `M A x − M y`.
    pub fn residual(&self, x: &ComplexImage, y: &MultiCoilKSpace) -> Result<Vec<ComplexImage>> {
        if y.num_coils() != self.num_coils() {
            return Err(invalid(format!("{} measured coils for a {}-coil operator", y.num_coils(), self.num_coils())));
        }
        let ax = self.forward(x)?;
        ax.iter()
            .zip(y.planes())
            .map(|(a, m)| {
                ensure_shape(a.shape(), m.shape())?;
                a.sub(&mask_plane(m, &self.keep))
            })
            .collect()
    }

    /// `Aᴴ(M A x − M y)`.
    pub fn data_gradient(&self, x: &ComplexImage, y: &MultiCoilKSpace) -> Result<ComplexImage> {
        self.adjoint(&self.residual(x, y)?)
    }
}
