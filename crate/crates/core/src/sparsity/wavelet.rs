use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{invalid, Result};
use crate::tensor::{Complex64, ComplexImage};

/// Detail bands of one decomposition level, named (horizontal, vertical) filter.
#[derive(Clone, Debug, PartialEq)]
pub struct DetailBands {
    pub lh: ComplexImage,
    pub hl: ComplexImage,
    pub hh: ComplexImage,
}

/// Multi-level orthonormal Haar decomposition of a (zero-padded) image.
///
/// `details[0]` is the finest level.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletCoeffs {
    pub levels: usize,
    pub details: Vec<DetailBands>,
    pub approx: ComplexImage,
    original: (usize, usize),
    offset: (usize, usize),
}

impl WaveletCoeffs {
    pub fn original_shape(&self) -> (usize, usize) {
        self.original
    }

    pub fn coefficient_count(&self) -> usize {
        self.approx.len() + self.details.iter().map(|d| d.lh.len() + d.hl.len() + d.hh.len()).sum::<usize>()
    }

    pub fn details_mut(&mut self) -> impl Iterator<Item = &mut ComplexImage> {
        self.details.iter_mut().flat_map(|d| [&mut d.lh, &mut d.hl, &mut d.hh])
    }

    pub fn details_iter(&self) -> impl Iterator<Item = &ComplexImage> {
        self.details.iter().flat_map(|d| [&d.lh, &d.hl, &d.hh])
    }

    /// `Σ |c|` over detail coefficients only.
    pub fn detail_l1(&self) -> f64 {
        self.details_iter().flat_map(|b| b.data()).map(|v| v.norm()).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.approx.norm_sqr() + self.details_iter().map(ComplexImage::norm_sqr).sum::<f64>()
    }
}

/// One 1D Haar step on a pair: `((a + b)/√2, (a − b)/√2)`.
#[inline]
pub(crate) fn haar_pair(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    ((a + b) * FRAC_1_SQRT_2, (a - b) * FRAC_1_SQRT_2)
}

fn padded_len(n: usize, levels: usize) -> usize {
    let block = 1usize << levels;
    n.div_ceil(block) * block
}

fn check_levels(shape: (usize, usize), levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(invalid("wavelet needs at least one level"));
    }
    if levels >= usize::BITS as usize || (1usize << levels) > shape.0.max(shape.1) {
        return Err(invalid(format!("{levels} wavelet levels too deep for a {}x{} image", shape.0, shape.1)));
    }
    Ok(())
}

pub fn wavelet_forward(x: &ComplexImage, levels: usize) -> Result<WaveletCoeffs> {
    let original = x.shape();
    check_levels(original, levels)?;
    let (ph, pw) = (padded_len(original.0, levels), padded_len(original.1, levels));
    let offset = ((ph - original.0) / 2, (pw - original.1) / 2);
    let mut approx = ComplexImage::zeros(ph, pw);
    for r in 0..original.0 {
        for c in 0..original.1 {
            approx.set(r + offset.0, c + offset.1, x.get(r, c));
        }
    }

    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (ll, bands) = analysis_step(&approx);
        details.push(bands);
        approx = ll;
    }
    Ok(WaveletCoeffs { levels, details, approx, original, offset })
}

pub fn wavelet_inverse(c: &WaveletCoeffs) -> Result<ComplexImage> {
    if c.details.len() != c.levels {
        return Err(invalid("coefficient levels inconsistent with detail bands"));
    }
    let mut approx = c.approx.clone();
    for bands in c.details.iter().rev() {
        approx = synthesis_step(&approx, bands)?;
    }
    let (h, w) = c.original;
    Ok(ComplexImage::from_fn(h, w, |r, col| approx.get(r + c.offset.0, col + c.offset.1)))
}

fn analysis_step(a: &ComplexImage) -> (ComplexImage, DetailBands) {
    let (h, w) = a.shape();
    let (h2, w2) = (h / 2, w / 2);
    let mut ll = ComplexImage::zeros(h2, w2);
    let mut lh = ComplexImage::zeros(h2, w2);
    let mut hl = ComplexImage::zeros(h2, w2);
    let mut hh = ComplexImage::zeros(h2, w2);
    for r in 0..h2 {
        for c in 0..w2 {
            // Horizontal pass on both rows, then vertical on the results.
            let (l0, h0) = haar_pair(a.get(2 * r, 2 * c), a.get(2 * r, 2 * c + 1));
            let (l1, h1) = haar_pair(a.get(2 * r + 1, 2 * c), a.get(2 * r + 1, 2 * c + 1));
            let (vll, vlh) = haar_pair(l0, l1);
            let (vhl, vhh) = haar_pair(h0, h1);
            ll.set(r, c, vll);
            lh.set(r, c, vlh);
            hl.set(r, c, vhl);
            hh.set(r, c, vhh);
        }
    }
    (ll, DetailBands { lh, hl, hh })
}

fn synthesis_step(ll: &ComplexImage, bands: &DetailBands) -> Result<ComplexImage> {
    let shape = ll.shape();
    for b in [&bands.lh, &bands.hl, &bands.hh] {
        if b.shape() != shape {
            return Err(invalid("detail band shape does not match approximation"));
        }
    }
    let (h2, w2) = shape;
    let mut out = ComplexImage::zeros(2 * h2, 2 * w2);
    for r in 0..h2 {
        for c in 0..w2 {
            // haar_pair is its own inverse.
            let (l0, l1) = haar_pair(ll.get(r, c), bands.lh.get(r, c));
            let (h0, h1) = haar_pair(bands.hl.get(r, c), bands.hh.get(r, c));
            let (a00, a01) = haar_pair(l0, h0);
            let (a10, a11) = haar_pair(l1, h1);
            out.set(2 * r, 2 * c, a00);
            out.set(2 * r, 2 * c + 1, a01);
            out.set(2 * r + 1, 2 * c, a10);
            out.set(2 * r + 1, 2 * c + 1, a11);
        }
    }
    Ok(out)
}
