//! Training losses recorded on a [`Tape`]. Values agree with [`crate::metrics`].

use super::array::Array3;
use super::tape::{Tape, Var};
use crate::error::{invalid, Result};
use crate::metrics::{max_scales, MsSsimParams};
use crate::tensor::RealImage;

fn constant(tape: &mut Tape, t: &RealImage) -> Var {
    tape.input(Array3::from_real(t))
}

/// Mean absolute difference between `r` (`[1, h, w]`) and `t`.
pub fn l1_on_tape(tape: &mut Tape, r: Var, t: &RealImage) -> Result<Var> {
    let tv = constant(tape, t);
    let d = tape.sub(r, tv)?;
    let a = tape.abs(d);
    Ok(tape.mean(a))
}

/// Multiscale SSIM of `r` against the constant `t`.
pub fn msssim_on_tape(tape: &mut Tape, r: Var, t: &RealImage, params: &MsSsimParams, data_range: f64) -> Result<Var> {
    let (c, h, w) = tape.value(r).shape();
    if c != 1 || (h, w) != t.shape() {
        return Err(invalid(format!("MS-SSIM input {:?} against a {:?} target", (c, h, w), t.shape())));
    }
    let scales = params.scales();
    let win = params.ssim.window;
    if scales == 0 || max_scales((h, w), win) < scales {
        return Err(invalid(format!("{h}x{w} image too small for {scales} MS-SSIM scales")));
    }
    if !(data_range > 0.0) {
        return Err(invalid(format!("data range must be positive, got {data_range}")));
    }
    let np = (win * win) as f64;
    let cov_norm = if win > 1 { np / (np - 1.0) } else { 1.0 };
    let c1 = (params.ssim.k1 * data_range).powi(2);
    let c2 = (params.ssim.k2 * data_range).powi(2);

    let mut x = r;
    let mut y = constant(tape, t);
    let mut value: Option<Var> = None;
    for (j, &weight) in params.weights.iter().enumerate() {
        let mean_of = |tape: &mut Tape, v: Var| -> Result<Var> {
            let s = tape.box_filter(v, win)?;
            Ok(tape.scale(s, 1.0 / np))
        };
        let ux = mean_of(tape, x)?;
        let uy = mean_of(tape, y)?;
        let xx = tape.mul(x, x)?;
        let yy = tape.mul(y, y)?;
        let xy = tape.mul(x, y)?;
        let exx = mean_of(tape, xx)?;
        let eyy = mean_of(tape, yy)?;
        let exy = mean_of(tape, xy)?;
        let ux2 = tape.mul(ux, ux)?;
        let uy2 = tape.mul(uy, uy)?;
        let uxy = tape.mul(ux, uy)?;
        let vx = tape.sub(exx, ux2)?;
        let vx = tape.scale(vx, cov_norm);
        let vy = tape.sub(eyy, uy2)?;
        let vy = tape.scale(vy, cov_norm);
        let vxy = tape.sub(exy, uxy)?;
        let vxy = tape.scale(vxy, cov_norm);

        let num = tape.scale(vxy, 2.0);
        let num = tape.add_scalar(num, c2);
        let den = tape.add(vx, vy)?;
        let den = tape.add_scalar(den, c2);
        let cs = tape.div(num, den)?;
        let map = if j + 1 == scales {
            let ln = tape.scale(uxy, 2.0);
            let ln = tape.add_scalar(ln, c1);
            let ld = tape.add(ux2, uy2)?;
            let ld = tape.add_scalar(ld, c1);
            let l = tape.div(ln, ld)?;
            tape.mul(l, cs)?
        } else {
            cs
        };
        let term = tape.mean(map);
        let term = tape.clamp_min(term, 0.0);
        let term = tape.powf(term, weight);
        value = Some(match value {
            Some(v) => tape.mul(v, term)?,
            None => term,
        });
        if j + 1 < scales {
            x = tape.avgpool2(x)?;
            y = tape.avgpool2(y)?;
        }
    }
    Ok(value.expect("at least one scale"))
}

/// `α (1 − MS-SSIM) + (1 − α) mean|r − t|` with `L = max(t)`.
pub fn combined_loss_on_tape(tape: &mut Tape, r: Var, t: &RealImage, alpha: f64, params: &MsSsimParams) -> Result<Var> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let l1 = l1_on_tape(tape, r, t)?;
    if alpha == 0.0 {
        return Ok(l1);
    }
    let ms = msssim_on_tape(tape, r, t, params, t.max())?;
    let one_minus = tape.scale(ms, -alpha);
    let one_minus = tape.add_scalar(one_minus, alpha);
    let l1w = tape.scale(l1, 1.0 - alpha);
    tape.add(one_minus, l1w)
}
