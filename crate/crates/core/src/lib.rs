//! Compressed-sensing MRI reconstruction.
//!
//! The crate covers the whole pipeline from synthetic acquisition to a
//! trainable unrolled network:
//!
//! * [`tensor`]: complex images and centered orthonormal FFTs.
//! * [`kspace`]: Cartesian masks, coil sensitivities, SENSE encoding, zero-filled recon.
//! * [`sparsity`]: Haar wavelets, soft-thresholding and the ISTA solver.
//! * [`priors`]: data-consistency, phase and background prior images.
//! * [`metrics`]: NMSE, PSNR, SSIM, MS-SSIM and training losses.
//! * [`unrolled`]: the unrolled multiscale network, its autodiff tape, optimizers and trainer.
//! * [`data`]: phantoms, acquisition simulation, tensor containers and image export.

pub mod data;
pub mod error;
pub mod kspace;
pub mod metrics;
pub mod priors;
pub mod sparsity;
pub mod tensor;
pub mod unrolled;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/kspace.md")]
    mod kspace {}
    #[doc = include_str!("../../../book/src/sparsity.md")]
    mod sparsity {}
    #[doc = include_str!("../../../book/src/priors.md")]
    mod priors {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/unrolled.md")]
    mod unrolled {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
