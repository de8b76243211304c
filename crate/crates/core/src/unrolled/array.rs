use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::tensor::{Complex64, ComplexImage, RealImage};

/// Dense `[channels, height, width]` array of `f64`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Array3 {
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub data: Vec<f64>,
}

impl Array3 {
    pub fn new(c: usize, h: usize, w: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != c * h * w {
            return Err(invalid(format!("{}x{}x{} array needs {} values, got {}", c, h, w, c * h * w, data.len())));
        }
        Ok(Self { c, h, w, data })
    }

    pub fn zeros(c: usize, h: usize, w: usize) -> Self {
        Self { c, h, w, data: vec![0.0; c * h * w] }
    }

    pub fn scalar(v: f64) -> Self {
        Self { c: 1, h: 1, w: 1, data: vec![v] }
    }

    /// Same shape, new values.
    pub(crate) fn with_data(&self, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self { c: self.c, h: self.h, w: self.w, data }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.c, self.h, self.w)
    }

    pub fn plane(&self) -> usize {
        self.h * self.w
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.data[c * self.plane()..(c + 1) * self.plane()]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let p = self.plane();
        &mut self.data[c * p..(c + 1) * p]
    }

    /// Real part in channel 0, imaginary part in channel 1.
    pub fn from_complex(img: &ComplexImage) -> Self {
        Self::from_complex_stack(std::slice::from_ref(img))
    }

    /// Two channels (real, imaginary) per image, in order.
    pub fn from_complex_stack(images: &[ComplexImage]) -> Self {
        let (h, w) = images[0].shape();
        let mut data = Vec::with_capacity(2 * images.len() * h * w);
        for img in images {
            data.extend(img.data().iter().map(|v| v.re));
            data.extend(img.data().iter().map(|v| v.im));
        }
        Self { c: 2 * images.len(), h, w, data }
    }

    pub fn from_real(img: &RealImage) -> Self {
        Self { c: 1, h: img.height(), w: img.width(), data: img.data().to_vec() }
    }

    /// Complex image from channels `2k` and `2k + 1`.
    pub fn to_complex(&self, k: usize) -> ComplexImage {
        let (re, im) = (self.channel(2 * k), self.channel(2 * k + 1));
        let data = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        ComplexImage::new(self.h, self.w, data).expect("channel size matches")
    }

    pub fn to_real(&self, c: usize) -> RealImage {
        RealImage::new(self.h, self.w, self.channel(c).to_vec()).expect("channel size matches")
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}
