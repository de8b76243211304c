//! Dense 2D complex and real images plus centered orthonormal Fourier transforms.
//!
//! Images are stored row-major. A [`ComplexImage`] doubles as a single-coil
//! k-space plane: rows are readout samples, columns are phase-encode lines.

mod fft;

pub use fft::{fft2c, ifft2c};
pub use num_complex::Complex64;

use crate::error::{ensure_shape, invalid, Result};

/// Row-major 2D array of complex values.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexImage {
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

/// Row-major 2D array of real values (magnitude images, prior channels).
#[derive(Clone, Debug, PartialEq)]
pub struct RealImage {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

macro_rules! image_common {
    ($ty:ident, $elem:ty, $zero:expr) => {
        impl $ty {
            pub fn new(height: usize, width: usize, data: Vec<$elem>) -> Result<Self> {
                if data.len() != height * width {
                    return Err(invalid(format!(
                        "data length {} does not match {}x{}",
                        data.len(),
                        height,
                        width
                    )));
                }
                Ok(Self { height, width, data })
            }

            pub fn zeros(height: usize, width: usize) -> Self {
                Self { height, width, data: vec![$zero; height * width] }
            }

            pub fn filled(height: usize, width: usize, value: $elem) -> Self {
                Self { height, width, data: vec![value; height * width] }
            }

            /// Builds an image by evaluating `f(row, col)` at every pixel.
            pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> $elem) -> Self {
                let mut data = Vec::with_capacity(height * width);
                for r in 0..height {
                    for c in 0..width {
                        data.push(f(r, c));
                    }
                }
                Self { height, width, data }
            }

            #[inline]
            pub fn height(&self) -> usize {
                self.height
            }

            #[inline]
            pub fn width(&self) -> usize {
                self.width
            }

            #[inline]
            pub fn shape(&self) -> (usize, usize) {
                (self.height, self.width)
            }

            #[inline]
            pub fn len(&self) -> usize {
                self.data.len()
            }

            #[inline]
            pub fn is_empty(&self) -> bool {
                self.data.is_empty()
            }

            #[inline]
            pub fn data(&self) -> &[$elem] {
                &self.data
            }

            #[inline]
            pub fn data_mut(&mut self) -> &mut [$elem] {
                &mut self.data
            }

            pub fn into_data(self) -> Vec<$elem> {
                self.data
            }

            #[inline]
            pub fn get(&self, row: usize, col: usize) -> $elem {
                self.data[row * self.width + col]
            }

            #[inline]
            pub fn set(&mut self, row: usize, col: usize, value: $elem) {
                self.data[row * self.width + col] = value;
            }

            pub fn map(&self, f: impl Fn($elem) -> $elem) -> Self {
                Self { height: self.height, width: self.width, data: self.data.iter().map(|&v| f(v)).collect() }
            }

            /// Pixelwise combination of two equally shaped images.
            pub fn zip_with(&self, other: &Self, f: impl Fn($elem, $elem) -> $elem) -> Result<Self> {
                ensure_shape(self.shape(), other.shape())?;
                let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
                Ok(Self { height: self.height, width: self.width, data })
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                self.zip_with(other, |a, b| a + b)
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.zip_with(other, |a, b| a - b)
            }

            pub fn all_finite(&self) -> bool {
                self.data.iter().all(|v| v.is_finite())
            }
        }
    };
}

image_common!(ComplexImage, Complex64, Complex64::new(0.0, 0.0));
image_common!(RealImage, f64, 0.0);

impl ComplexImage {
    pub fn from_real(img: &RealImage) -> Self {
        Self {
            height: img.height,
            width: img.width,
            data: img.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        self.map(|v| v * s)
    }

    /// Pixelwise modulus.
    pub fn abs(&self) -> RealImage {
        RealImage { height: self.height, width: self.width, data: self.data.iter().map(|v| v.norm()).collect() }
    }

    pub fn re(&self) -> RealImage {
        RealImage { height: self.height, width: self.width, data: self.data.iter().map(|v| v.re).collect() }
    }

    pub fn im(&self) -> RealImage {
        RealImage { height: self.height, width: self.width, data: self.data.iter().map(|v| v.im).collect() }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Inner product `Σ conj(self) · other`.
    pub fn dot(&self, other: &Self) -> Result<Complex64> {
        ensure_shape(self.shape(), other.shape())?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum())
    }

    /// Pixelwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }
}

impl RealImage {
    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length() {
        assert!(ComplexImage::new(2, 3, vec![Complex64::new(0.0, 0.0); 5]).is_err());
        assert!(RealImage::new(2, 2, vec![0.0; 4]).is_ok());
    }

    #[test]
    fn zip_checks_shape() {
        let a = RealImage::zeros(2, 2);
        let b = RealImage::zeros(2, 3);
        assert!(a.add(&b).is_err());
    }

    #[test]
    fn dot_is_conjugate_linear_in_first_argument() {
        let a = ComplexImage::filled(1, 1, Complex64::new(0.0, 1.0));
        let b = ComplexImage::filled(1, 1, Complex64::new(1.0, 0.0));
        assert_eq!(a.dot(&b).unwrap(), Complex64::new(0.0, -1.0));
    }
}
