use std::cell::RefCell;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::{Complex64, ComplexImage};
use crate::error::{invalid, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

fn plan(len: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match dir {
            Direction::Forward => p.plan_fft_forward(len),
            Direction::Inverse => p.plan_fft_inverse(len),
        }
    })
}

/// Centered orthonormal 2D DFT: zero frequency lands at `(h/2, w/2)`.
pub fn fft2c(img: &ComplexImage) -> Result<ComplexImage> {
    centered(img, Direction::Forward)
}

/// Inverse of [`fft2c`]; under orthonormal scaling it is also the adjoint.
pub fn ifft2c(ksp: &ComplexImage) -> Result<ComplexImage> {
    centered(ksp, Direction::Inverse)
}

fn centered(img: &ComplexImage, dir: Direction) -> Result<ComplexImage> {
    let (h, w) = img.shape();
    if h == 0 || w == 0 {
        return Err(invalid("fft of an image with a zero dimension"));
    }
    // ifftshift on the way in, fftshift on the way out.
    let mut buf = shift(img.data(), h, w, h - h / 2, w - w / 2);
    transform_rows(&mut buf, w, dir);
    let mut t = transpose(&buf, h, w);
    transform_rows(&mut t, h, dir);
    let buf = transpose(&t, w, h);
    let mut out = shift(&buf, h, w, h / 2, w / 2);
    let norm = 1.0 / ((h * w) as f64).sqrt();
    for v in &mut out {
        *v *= norm;
    }
    ComplexImage::new(h, w, out)
}

/// Circular shift: element `(r, c)` moves to `((r + dr) % h, (c + dc) % w)`.
fn shift(data: &[Complex64], h: usize, w: usize, dr: usize, dc: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..h {
        let tr = (r + dr) % h;
        let src = &data[r * w..(r + 1) * w];
        let dst = &mut out[tr * w..(tr + 1) * w];
        let split = w - dc % w;
        // dst[(c + dc) % w] = src[c]
        dst[dc % w..].copy_from_slice(&src[..split]);
        dst[..dc % w].copy_from_slice(&src[split..]);
    }
    out
}

fn transform_rows(buf: &mut [Complex64], len: usize, dir: Direction) {
    if len == 1 {
        return;
    }
    let fft = plan(len, dir);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(buf, &mut scratch);
}

fn transpose(data: &[Complex64], h: usize, w: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..h {
        for c in 0..w {
            out[c * h + r] = data[r * w + c];
        }
    }
    out
}
