//! Cartesian undersampling, coil sensitivity estimation and the SENSE encoding operator.

mod coils;
mod mask;
mod operator;

pub use coils::{estimate_sensitivities, rss_combine, sense_expand, sense_reduce, SensitivityMaps};
pub use mask::{make_cartesian_mask, make_cartesian_mask_with, SamplingMask, SamplingMode};
pub use operator::{apply_mask, lowpass_image, zero_filled_recon, MultiCoilKSpace, SenseOperator};
