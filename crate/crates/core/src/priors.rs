//! Soft prior images fed to each unrolled block alongside the current estimate.
//!
//! * `e_dc = Aᴴ(M A x − M y)`: data-consistency residual in image space.
//! * `e_φ = Im(x · conj(x_lpf) / |x_lpf|)`: what remains imaginary once the
//!   slowly varying low-pass phase is removed.
//! * `e_bg = x / |x_lpf|`: signal relative to the low-pass magnitude, large in air.
//!
//! `x_lpf` is the coil-combined image of the fully sampled k-space center. It
//! depends only on the measurement, so it is computed once per slice.

use crate::error::{ensure_shape, Result};
use crate::kspace::{lowpass_image, sense_reduce, MultiCoilKSpace, SenseOperator};
use crate::tensor::{Complex64, ComplexImage, RealImage};

/// Relative floor on `|x_lpf|` in the phase and background priors.
pub const LOWPASS_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct PriorBundle {
    pub e_dc: ComplexImage,
    pub e_phi: RealImage,
    pub e_bg: ComplexImage,
    pub x0_lpf: ComplexImage,
}

/// Cached low-pass reference with the pixelwise weights both priors need.
#[derive(Clone, Debug)]
pub struct LowpassReference {
    x0_lpf: ComplexImage,
    phase_weight: ComplexImage,
    inv_modulus: RealImage,
}

impl LowpassReference {
    pub fn new(x0_lpf: ComplexImage) -> Self {
        Self::with_floor(x0_lpf, LOWPASS_FLOOR)
    }

    /// `floor` is relative to `max|x_lpf|`.
    pub fn with_floor(x0_lpf: ComplexImage, floor: f64) -> Self {
        let floor = floor * x0_lpf.max_abs();
        let modulus = x0_lpf.abs().map(|m| m.max(floor));
        let phase_weight = ComplexImage::from_fn(x0_lpf.height(), x0_lpf.width(), |r, c| {
            let d = modulus.get(r, c);
            if d > 0.0 {
                x0_lpf.get(r, c).conj() / d
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let inv_modulus = modulus.map(|d| if d > 0.0 { 1.0 / d } else { 0.0 });
        Self { x0_lpf, phase_weight, inv_modulus }
    }

    /// Coil-combined low-pass image of the measured data.
    pub fn from_kspace(y: &MultiCoilKSpace, op: &SenseOperator) -> Result<Self> {
        Ok(Self::new(combined_lowpass(y, op)?))
    }

    pub fn from_kspace_with_floor(y: &MultiCoilKSpace, op: &SenseOperator, floor: f64) -> Result<Self> {
        Ok(Self::with_floor(combined_lowpass(y, op)?, floor))
    }

    pub fn x0_lpf(&self) -> &ComplexImage {
        &self.x0_lpf
    }

    /// `conj(x_lpf) / max(|x_lpf|, ε)`.
    pub fn phase_weight(&self) -> &ComplexImage {
        &self.phase_weight
    }

    /// `1 / max(|x_lpf|, ε)`.
    pub fn inv_modulus(&self) -> &RealImage {
        &self.inv_modulus
    }

    pub fn phase_prior(&self, x: &ComplexImage) -> Result<RealImage> {
        ensure_shape(self.x0_lpf.shape(), x.shape())?;
        let data = x.data().iter().zip(self.phase_weight.data()).map(|(a, w)| (a * w).im).collect();
        RealImage::new(x.height(), x.width(), data)
    }

    pub fn background_prior(&self, x: &ComplexImage) -> Result<ComplexImage> {
        ensure_shape(self.x0_lpf.shape(), x.shape())?;
        let data = x.data().iter().zip(self.inv_modulus.data()).map(|(a, s)| a * s).collect();
        ComplexImage::new(x.height(), x.width(), data)
    }
}

/// Low-pass coil images combined with the operator's sensitivities (single coil: as-is).
pub fn combined_lowpass(y: &MultiCoilKSpace, op: &SenseOperator) -> Result<ComplexImage> {
    let mut lowpass = lowpass_image(y)?;
    match op.maps() {
        Some(maps) => sense_reduce(&lowpass, maps),
        None => Ok(lowpass.remove(0)),
    }
}

pub fn dc_prior(x: &ComplexImage, y: &MultiCoilKSpace, op: &SenseOperator) -> Result<ComplexImage> {
    op.data_gradient(x, y)
}

pub fn phase_prior(x: &ComplexImage, x0_lpf: &ComplexImage) -> Result<RealImage> {
    LowpassReference::new(x0_lpf.clone()).phase_prior(x)
}

pub fn background_prior(x: &ComplexImage, x0_lpf: &ComplexImage) -> Result<ComplexImage> {
    LowpassReference::new(x0_lpf.clone()).background_prior(x)
}

pub fn build_prior_bundle(x: &ComplexImage, y: &MultiCoilKSpace, op: &SenseOperator) -> Result<PriorBundle> {
    let reference = LowpassReference::from_kspace(y, op)?;
    build_prior_bundle_with(x, y, op, &reference)
}

/// Same as [`build_prior_bundle`] with a precomputed low-pass reference.
pub fn build_prior_bundle_with(
    x: &ComplexImage,
    y: &MultiCoilKSpace,
    op: &SenseOperator,
    reference: &LowpassReference,
) -> Result<PriorBundle> {
    Ok(PriorBundle {
        e_dc: dc_prior(x, y, op)?,
        e_phi: reference.phase_prior(x)?,
        e_bg: reference.background_prior(x)?,
        x0_lpf: reference.x0_lpf().clone(),
    })
}
