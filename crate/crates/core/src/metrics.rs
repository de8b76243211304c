//! Image quality metrics and value-level training losses.
//!
//! All metrics work on real (magnitude) images. SSIM follows the windowed
//! convention used by the fastMRI evaluation: a uniform `7×7` window over
//! every fully contained position, sample (N−1) covariance normalization,
//! `K1 = 0.01`, `K2 = 0.03`, and `L` equal to the target maximum.

use std::io::Write;

use serde::Serialize;

use crate::error::{ensure_shape, invalid, Result};
use crate::tensor::RealImage;

/// Five-scale weights of the standard multiscale SSIM.
pub const MSSSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];

/// Mixing weight between MS-SSIM and ℓ1 in [`combined_loss`].
pub const DEFAULT_ALPHA: f64 = 0.84;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct SsimParams {
    pub window: usize,
    pub k1: f64,
    pub k2: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self { window: 7, k1: 0.01, k2: 0.03 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct MsSsimParams {
    pub ssim: SsimParams,
    /// One weight per scale, finest first.
    pub weights: Vec<f64>,
}

impl Default for MsSsimParams {
    fn default() -> Self {
        Self { ssim: SsimParams::default(), weights: MSSSIM_WEIGHTS.to_vec() }
    }
}

impl MsSsimParams {
    /// The largest prefix of the standard weights (renormalized to sum to one)
    /// whose coarsest scale still fits the SSIM window.
    pub fn fitting(shape: (usize, usize), ssim: SsimParams) -> Result<Self> {
        let scales = max_scales(shape, ssim.window);
        if scales == 0 {
            return Err(invalid(format!("{}x{} image smaller than the {} window", shape.0, shape.1, ssim.window)));
        }
        let used = &MSSSIM_WEIGHTS[..scales.min(MSSSIM_WEIGHTS.len())];
        let total: f64 = used.iter().sum();
        Ok(Self { ssim, weights: used.iter().map(|w| w / total).collect() })
    }

    pub fn scales(&self) -> usize {
        self.weights.len()
    }
}

/// Number of dyadic scales whose images are at least `window` on each side.
pub fn max_scales(shape: (usize, usize), window: usize) -> usize {
    let (mut h, mut w) = shape;
    let mut n = 0;
    while h >= window && w >= window && window > 0 {
        n += 1;
        h /= 2;
        w /= 2;
    }
    n
}

/// `‖r − t‖² / ‖t‖²`.
pub fn nmse(r: &RealImage, t: &RealImage) -> Result<f64> {
    ensure_shape(t.shape(), r.shape())?;
    let denom = t.norm_sqr();
    if denom <= 0.0 {
        return Err(invalid("nmse against an all-zero target"));
    }
    Ok(r.sub(t)?.norm_sqr() / denom)
}

/// `10 log10(max(t)² / MSE)` in dB; `+∞` for identical images.
pub fn psnr(r: &RealImage, t: &RealImage) -> Result<f64> {
    ensure_shape(t.shape(), r.shape())?;
    let mse = r.sub(t)?.norm_sqr() / t.len() as f64;
    let peak = t.max();
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Sum over every fully contained `win × win` window, computed separably.
pub(crate) fn box_sum_valid(data: &[f64], h: usize, w: usize, win: usize) -> (Vec<f64>, usize, usize) {
    let (oh, ow) = (h + 1 - win, w + 1 - win);
    let mut rows = vec![0.0; h * ow];
    for r in 0..h {
        let line = &data[r * w..(r + 1) * w];
        let mut acc: f64 = line[..win].iter().sum();
        rows[r * ow] = acc;
        for c in 1..ow {
            acc += line[c + win - 1] - line[c - 1];
            rows[r * ow + c] = acc;
        }
    }
    let mut out = vec![0.0; oh * ow];
    for c in 0..ow {
        let mut acc: f64 = (0..win).map(|r| rows[r * ow + c]).sum();
        out[c] = acc;
        for r in 1..oh {
            acc += rows[(r + win - 1) * ow + c] - rows[(r - 1) * ow + c];
            out[r * ow + c] = acc;
        }
    }
    (out, oh, ow)
}

/// Per-window luminance and contrast-structure terms.
struct SsimMaps {
    luminance: Vec<f64>,
    contrast_structure: Vec<f64>,
}

fn ssim_maps(r: &RealImage, t: &RealImage, params: &SsimParams, data_range: f64) -> Result<SsimMaps> {
    ensure_shape(t.shape(), r.shape())?;
    let (h, w) = r.shape();
    let win = params.window;
    if win == 0 || win > h || win > w {
        return Err(invalid(format!("SSIM window {win} does not fit a {h}x{w} image")));
    }
    if !(data_range > 0.0) {
        return Err(invalid(format!("SSIM data range must be positive, got {data_range}")));
    }
    let np = (win * win) as f64;
    let cov_norm = if win > 1 { np / (np - 1.0) } else { 1.0 };
    let c1 = (params.k1 * data_range).powi(2);
    let c2 = (params.k2 * data_range).powi(2);

    let x = r.data();
    let y = t.data();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let (sx, _, _) = box_sum_valid(x, h, w, win);
    let (sy, _, _) = box_sum_valid(y, h, w, win);
    let (sxx, _, _) = box_sum_valid(&xx, h, w, win);
    let (syy, _, _) = box_sum_valid(&yy, h, w, win);
    let (sxy, _, _) = box_sum_valid(&xy, h, w, win);

    let n = sx.len();
    let mut luminance = Vec::with_capacity(n);
    let mut contrast_structure = Vec::with_capacity(n);
    for i in 0..n {
        let (ux, uy) = (sx[i] / np, sy[i] / np);
        let vx = cov_norm * (sxx[i] / np - ux * ux);
        let vy = cov_norm * (syy[i] / np - uy * uy);
        let vxy = cov_norm * (sxy[i] / np - ux * uy);
        luminance.push((2.0 * ux * uy + c1) / (ux * ux + uy * uy + c1));
        contrast_structure.push((2.0 * vxy + c2) / (vx + vy + c2));
    }
    Ok(SsimMaps { luminance, contrast_structure })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean windowed SSIM (α = β = γ = 1) of two magnitude images.
pub fn ssim(r: &RealImage, t: &RealImage, params: &SsimParams, data_range: f64) -> Result<f64> {
    let maps = ssim_maps(r, t, params, data_range)?;
    let prod: Vec<f64> = maps.luminance.iter().zip(&maps.contrast_structure).map(|(l, cs)| l * cs).collect();
    Ok(mean(&prod))
}

/// 2×2 average pooling, dropping an odd trailing row or column.
pub(crate) fn downsample2(img: &RealImage) -> RealImage {
    let (h, w) = (img.height() / 2, img.width() / 2);
    RealImage::from_fn(h, w, |r, c| {
        0.25 * (img.get(2 * r, 2 * c) + img.get(2 * r, 2 * c + 1) + img.get(2 * r + 1, 2 * c) + img.get(2 * r + 1, 2 * c + 1))
    })
}

/// Multiscale SSIM: `ssim_M^{w_M} · Π_{j<M} cs_j^{w_j}`.
///
/// Negative per-scale terms are clamped to zero before exponentiation, so
/// the result lies in `[0, 1]`.
pub fn msssim(r: &RealImage, t: &RealImage, params: &MsSsimParams, data_range: f64) -> Result<f64> {
    ensure_shape(t.shape(), r.shape())?;
    let scales = params.scales();
    if scales == 0 {
        return Err(invalid("MS-SSIM needs at least one scale"));
    }
    if max_scales(r.shape(), params.ssim.window) < scales {
        return Err(invalid(format!(
            "{}x{} image too small for {scales} MS-SSIM scales with window {}",
            r.height(),
            r.width(),
            params.ssim.window
        )));
    }
    let mut x = r.clone();
    let mut y = t.clone();
    let mut value = 1.0;
    for (j, &weight) in params.weights.iter().enumerate() {
        let maps = ssim_maps(&x, &y, &params.ssim, data_range)?;
        let term = if j + 1 == scales {
            mean(&maps.luminance.iter().zip(&maps.contrast_structure).map(|(l, cs)| l * cs).collect::<Vec<_>>())
        } else {
            mean(&maps.contrast_structure)
        };
        value *= term.max(0.0).powf(weight);
        if j + 1 < scales {
            x = downsample2(&x);
            y = downsample2(&y);
        }
    }
    Ok(value)
}

pub fn l1_loss(r: &RealImage, t: &RealImage) -> Result<f64> {
    Ok(r.sub(t)?.data().iter().map(|d| d.abs()).sum::<f64>() / r.len() as f64)
}

pub fn mse_loss(r: &RealImage, t: &RealImage) -> Result<f64> {
    Ok(r.sub(t)?.norm_sqr() / r.len() as f64)
}

/// Mean Huber penalty: `½d²` for `|d| ≤ δ`, `δ(|d| − ½δ)` beyond.
pub fn huber_loss(r: &RealImage, t: &RealImage, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(invalid(format!("huber delta must be positive, got {delta}")));
    }
    let total: f64 = r
        .sub(t)?
        .data()
        .iter()
        .map(|d| {
            let a = d.abs();
            if a <= delta {
                0.5 * a * a
            } else {
                delta * (a - 0.5 * delta)
            }
        })
        .sum();
    Ok(total / r.len() as f64)
}

pub fn ssim_loss(r: &RealImage, t: &RealImage, params: &SsimParams, data_range: f64) -> Result<f64> {
    Ok(1.0 - ssim(r, t, params, data_range)?)
}

/// `α (1 − MS-SSIM) + (1 − α) mean|r − t|`, with `L = max(t)`.
pub fn combined_loss(r: &RealImage, t: &RealImage, alpha: f64, params: &MsSsimParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let l1 = l1_loss(r, t)?;
    if alpha == 0.0 {
        return Ok(l1);
    }
    let ms = msssim(r, t, params, t.max())?;
    Ok(alpha * (1.0 - ms) + (1.0 - alpha) * l1)
}

/// Quality of one reconstruction against its target.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub dataset: String,
    pub acceleration: f64,
    /// `None` for volume aggregates.
    pub slice: Option<usize>,
    pub nmse: f64,
    pub psnr: f64,
    pub ssim: f64,
    pub msssim: f64,
}

pub const METRICS_CSV_HEADER: &str = "dataset,acceleration,slice,nmse,psnr,ssim,msssim";

/// Metrics for one slice. `data_range` is usually the volume maximum of the target.
pub fn evaluate_slice(r: &RealImage, t: &RealImage, data_range: f64) -> Result<(f64, f64, f64, f64)> {
    let params = SsimParams::default();
    let ms = MsSsimParams::fitting(t.shape(), params)?;
    Ok((nmse(r, t)?, psnr(r, t)?, ssim(r, t, &params, data_range)?, msssim(r, t, &ms, data_range)?))
}

/// Per-slice reports plus their mean as the volume aggregate.
pub fn evaluate_volume(
    recons: &[RealImage],
    targets: &[RealImage],
    dataset: &str,
    acceleration: f64,
) -> Result<(Vec<MetricsReport>, MetricsReport)> {
    if recons.len() != targets.len() || targets.is_empty() {
        return Err(invalid(format!("{} reconstructions for {} targets", recons.len(), targets.len())));
    }
    let data_range = targets.iter().map(RealImage::max).fold(f64::NEG_INFINITY, f64::max);
    let mut slices = Vec::with_capacity(targets.len());
    for (i, (r, t)) in recons.iter().zip(targets).enumerate() {
        let (nmse, psnr, ssim, msssim) = evaluate_slice(r, t, data_range)?;
        slices.push(MetricsReport { dataset: dataset.to_string(), acceleration, slice: Some(i), nmse, psnr, ssim, msssim });
    }
    let aggregate = aggregate_reports(&slices, dataset, acceleration);
    Ok((slices, aggregate))
}

/// Mean of each metric over `reports`.
pub fn aggregate_reports(reports: &[MetricsReport], dataset: &str, acceleration: f64) -> MetricsReport {
    let n = reports.len() as f64;
    let avg = |f: fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    MetricsReport {
        dataset: dataset.to_string(),
        acceleration,
        slice: None,
        nmse: avg(|r| r.nmse),
        psnr: avg(|r| r.psnr),
        ssim: avg(|r| r.ssim),
        msssim: avg(|r| r.msssim),
    }
}

pub fn write_metrics_csv<W: Write>(reports: &[MetricsReport], mut out: W) -> Result<()> {
    writeln!(out, "{METRICS_CSV_HEADER}")?;
    for r in reports {
        let slice = r.slice.map_or_else(|| "all".to_string(), |s| s.to_string());
        writeln!(out, "{},{},{},{},{},{},{}", r.dataset, r.acceleration, slice, r.nmse, r.psnr, r.ssim, r.msssim)?;
    }
    Ok(())
}

pub fn write_metrics_json<W: Write>(reports: &[MetricsReport], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, reports)?;
    Ok(())
}
