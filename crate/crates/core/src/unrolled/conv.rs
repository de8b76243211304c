//! Same-size 2-D convolution (zero padding, stride 1) as im2col plus GEMM.

use super::array::Array3;

/// `C = alpha · A B + beta · C` for row-major `A: m×k`, `B: k×n`, `C: m×n`,
/// where `transpose_b` reads `B` from an `n×k` row-major buffer.
fn gemm(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], transpose_b: bool, beta: f64, c: &mut [f64]) {
    let (rsb, csb) = if transpose_b { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: slice lengths cover every index implied by the strides.
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    unsafe {
        matrixmultiply::dgemm(m, k, n, 1.0, a.as_ptr(), k as isize, 1, b.as_ptr(), rsb, csb, beta, c.as_mut_ptr(), n as isize, 1);
    }
}

/// `Aᵀ B` for row-major `A: k×m`, `B: k×n`.
fn gemm_at(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    unsafe {
        matrixmultiply::dgemm(m, k, n, 1.0, a.as_ptr(), 1, m as isize, b.as_ptr(), n as isize, 1, 0.0, c.as_mut_ptr(), n as isize, 1);
    }
}

pub(crate) fn im2col(x: &Array3, k: usize) -> Vec<f64> {
    let (h, w) = (x.h, x.w);
    let p = k / 2;
    let hw = h * w;
    let mut cols = vec![0.0; x.c * k * k * hw];
    for ci in 0..x.c {
        let src = x.channel(ci);
        for ky in 0..k {
            for kx in 0..k {
                let row = &mut cols[((ci * k + ky) * k + kx) * hw..][..hw];
                let (c_lo, c_hi) = (p.saturating_sub(kx), (w + p).saturating_sub(kx).min(w));
                for r in 0..h {
                    let rr = r + ky;
                    if rr < p || rr - p >= h || c_lo >= c_hi {
                        continue;
                    }
                    let s = (rr - p) * w;
                    let sc = c_lo + kx - p;
                    row[r * w + c_lo..r * w + c_hi].copy_from_slice(&src[s + sc..s + sc + (c_hi - c_lo)]);
                }
            }
        }
    }
    cols
}

fn col2im(cols: &[f64], c: usize, h: usize, w: usize, k: usize, out: &mut [f64]) {
    let p = k / 2;
    let hw = h * w;
    for ci in 0..c {
        let dst = &mut out[ci * hw..(ci + 1) * hw];
        for ky in 0..k {
            for kx in 0..k {
                let row = &cols[((ci * k + ky) * k + kx) * hw..][..hw];
                let (c_lo, c_hi) = (p.saturating_sub(kx), (w + p).saturating_sub(kx).min(w));
                for r in 0..h {
                    let rr = r + ky;
                    if rr < p || rr - p >= h || c_lo >= c_hi {
                        continue;
                    }
                    let s = (rr - p) * w + c_lo + kx - p;
                    for (d, v) in dst[s..s + (c_hi - c_lo)].iter_mut().zip(&row[r * w + c_lo..r * w + c_hi]) {
                        *d += v;
                    }
                }
            }
        }
    }
}

/// `weight` is `[co, ci, k·k]`, `bias` is `[co, 1, 1]`.
pub(crate) fn conv2d_forward(x: &Array3, weight: &Array3, bias: &Array3, k: usize) -> Array3 {
    let co = weight.c;
    let hw = x.plane();
    let kk = x.c * k * k;
    let mut out = Array3::zeros(co, x.h, x.w);
    for (o, b) in out.data.chunks_mut(hw).zip(&bias.data) {
        o.fill(*b);
    }
    let cols = im2col(x, k);
    gemm(co, kk, hw, &weight.data, &cols, false, 1.0, &mut out.data);
    out
}

/// Accumulates into `gx`, `gw`, `gb` when present.
pub(crate) fn conv2d_backward(
    x: &Array3,
    weight: &Array3,
    k: usize,
    gy: &[f64],
    gx: Option<&mut [f64]>,
    gw: Option<&mut [f64]>,
    gb: Option<&mut [f64]>,
) {
    let co = weight.c;
    let hw = x.plane();
    let kk = x.c * k * k;
    if let Some(gb) = gb {
        for (b, g) in gb.iter_mut().zip(gy.chunks(hw)) {
            *b += g.iter().sum::<f64>();
        }
    }
    if let Some(gw) = gw {
        let cols = im2col(x, k);
        gemm(co, hw, kk, gy, &cols, true, 1.0, gw);
    }
    if let Some(gx) = gx {
        let mut gcols = vec![0.0; kk * hw];
        gemm_at(kk, co, hw, &weight.data, gy, &mut gcols);
        col2im(&gcols, x.c, x.h, x.w, k, gx);
    }
}
