//! Classic compressed sensing: orthonormal Haar wavelets, soft-thresholding and ISTA.

mod ista;
mod wavelet;

pub use ista::{
    dc_gradient_step, ista_solve, objective_value, write_trace_csv, IstaConfig, IstaResult, Lambda, ObjectiveTerms,
    DEFAULT_RELATIVE_LAMBDA,
};
pub use wavelet::{wavelet_forward, wavelet_inverse, DetailBands, WaveletCoeffs};

use crate::error::{invalid, Result};
use crate::tensor::{Complex64, ComplexImage};

/// `max(|u| − λ, 0) · u / |u|`, with `u = 0` mapped to 0. No argument checks.
#[inline]
pub(crate) fn shrink(u: Complex64, lam: f64) -> Complex64 {
    let m = u.norm();
    if m <= lam {
        Complex64::new(0.0, 0.0)
    } else {
        u * ((m - lam) / m)
    }
}

/// Real `sign(u) · max(|u| − λ, 0)`. No argument checks.
#[inline]
pub(crate) fn shrink_real(u: f64, lam: f64) -> f64 {
    if u.abs() <= lam {
        0.0
    } else {
        u - lam.copysign(u)
    }
}

fn check_lambda(lam: f64) -> Result<()> {
    if lam >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("threshold must be non-negative, got {lam}")))
    }
}

/// Proximal map of `λ|·|` on a complex scalar.
pub fn soft_threshold(u: Complex64, lam: f64) -> Result<Complex64> {
    check_lambda(lam)?;
    Ok(shrink(u, lam))
}

/// Real-valued soft-threshold: `sign(u) · max(|u| − λ, 0)`.
pub fn soft_threshold_real(u: f64, lam: f64) -> Result<f64> {
    check_lambda(lam)?;
    Ok(shrink_real(u, lam))
}

pub fn soft_threshold_image(img: &ComplexImage, lam: f64) -> Result<ComplexImage> {
    check_lambda(lam)?;
    Ok(img.map(|u| shrink(u, lam)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scalar_examples() {
        assert_eq!(soft_threshold_real(3.0, 1.0).unwrap(), 2.0);
        assert_eq!(soft_threshold_real(-0.5, 1.0).unwrap(), 0.0);
        assert_eq!(soft_threshold_real(-3.0, 1.0).unwrap(), -2.0);
        let z = soft_threshold(Complex64::new(3.0, 4.0), 2.0).unwrap();
        assert!((z - Complex64::new(1.8, 2.4)).norm() < 1e-15);
        assert_eq!(soft_threshold(Complex64::new(0.0, 0.0), 0.0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn negative_threshold_is_rejected() {
        assert!(soft_threshold_real(1.0, -1e-9).is_err());
        assert!(soft_threshold(Complex64::new(1.0, 0.0), -1.0).is_err());
        assert!(soft_threshold_image(&ComplexImage::zeros(2, 2), -0.1).is_err());
    }

    proptest! {
        #[test]
        fn shrinkage_never_increases_magnitude(re in -10.0f64..10.0, im in -10.0f64..10.0, lam in 0.0f64..5.0) {
            let u = Complex64::new(re, im);
            let v = soft_threshold(u, lam).unwrap();
            prop_assert!(v.norm() <= u.norm() + 1e-15);
            // Direction preserved whenever something survives.
            if v.norm() > 0.0 {
                prop_assert!((v / v.norm() - u / u.norm()).norm() < 1e-12);
            }
        }

        #[test]
        fn larger_threshold_shrinks_more(u in -10.0f64..10.0, a in 0.0f64..5.0, b in 0.0f64..5.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(soft_threshold_real(u, hi).unwrap().abs() <= soft_threshold_real(u, lo).unwrap().abs());
        }
    }
}
