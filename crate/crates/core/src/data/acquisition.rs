use crate::error::Result;
use crate::kspace::{make_cartesian_mask_with, rss_combine, sense_expand, MultiCoilKSpace, SamplingMask, SamplingMode};
use crate::tensor::{fft2c, ComplexImage, RealImage};

use super::PhantomVolume;

/// Undersampled multi-coil k-space for every slice of a volume with its
/// fully sampled root-sum-of-squares ground truth.
#[derive(Clone, Debug)]
pub struct Acquisition {
    pub kspace: Vec<MultiCoilKSpace>,
    pub targets: Vec<RealImage>,
    pub mask: SamplingMask,
}

impl Acquisition {
    pub fn num_slices(&self) -> usize {
        self.kspace.len()
    }
}

/// One mask per volume, shared by every slice and coil.
pub fn simulate_acquisition(vol: &PhantomVolume, acceleration: f64, center_fraction: f64, seed: u64) -> Result<Acquisition> {
    simulate_acquisition_with(vol, acceleration, center_fraction, seed, SamplingMode::Bernoulli)
}

pub fn simulate_acquisition_with(
    vol: &PhantomVolume,
    acceleration: f64,
    center_fraction: f64,
    seed: u64,
    mode: SamplingMode,
) -> Result<Acquisition> {
    let width = vol.meta.size;
    let mask = make_cartesian_mask_with(width, acceleration, center_fraction, seed, mode)?;
    let mut kspace = Vec::with_capacity(vol.slices.len());
    let mut targets = Vec::with_capacity(vol.slices.len());
    for slice in &vol.slices {
        let coils = sense_expand(slice, &vol.maps)?;
        targets.push(rss_combine(&coils)?);
        let planes: Vec<ComplexImage> = coils
            .iter()
            .map(|c| {
                let mut k = fft2c(c)?;
                zero_unsampled(&mut k, &mask);
                Ok(k)
            })
            .collect::<Result<_>>()?;
        kspace.push(MultiCoilKSpace::new(planes, mask.clone())?);
    }
    Ok(Acquisition { kspace, targets, mask })
}

fn zero_unsampled(k: &mut ComplexImage, mask: &SamplingMask) {
    let w = k.width();
    for (i, v) in k.data_mut().iter_mut().enumerate() {
        if !mask.is_kept(i % w) {
            *v = Default::default();
        }
    }
}
