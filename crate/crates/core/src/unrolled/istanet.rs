//! ISTA-Net⁺ baseline: one shared transform pair applied after a hard
//! data-consistency gradient step in every block.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::array::Array3;
use super::context::SliceStack;
use super::model::{params_on_tape, Reconstructor, TapeForward};
use super::params::{ConvSlot, ParamSet};
use super::tape::{Tape, Var};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IstaNetConfig {
    pub blocks: usize,
    pub features: usize,
    pub kernel: usize,
    /// Step size of the data-consistency gradient step.
    pub rho: f64,
    /// Weight of the discrepancy term in the training loss.
    pub sigma: f64,
    pub initial_threshold: f64,
}

impl Default for IstaNetConfig {
    fn default() -> Self {
        Self { blocks: 5, features: 16, kernel: 3, rho: 1.0, sigma: 0.01, initial_threshold: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Slots {
    s0: ConvSlot,
    s1: ConvSlot,
    h0: ConvSlot,
    h1: ConvSlot,
    theta: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IstaNetPlus {
    config: IstaNetConfig,
    params: ParamSet,
    slots: Slots,
}

/// Baseline with default sizes and `blocks` unrolled iterations.
pub fn istanet_plus_config(blocks: usize, seed: u64) -> Result<IstaNetPlus> {
    IstaNetPlus::new(IstaNetConfig { blocks, ..IstaNetConfig::default() }, seed)
}

impl IstaNetPlus {
    /// Random transforms with the last layer of `Ŝ` at zero, so every block starts as the bare gradient step.
    pub fn new(config: IstaNetConfig, seed: u64) -> Result<Self> {
        if config.features == 0 || config.kernel % 2 == 0 || !(config.initial_threshold > 0.0) {
            return Err(invalid("ISTA-Net+ needs features >= 1, an odd kernel and a positive threshold"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, k) = (config.features, config.kernel);
        let mut params = ParamSet::new();
        let s0 = ConvSlot::declare(&mut params, "s.conv0", 2, f, k, false, &mut rng);
        let s1 = ConvSlot::declare(&mut params, "s.conv1", f, f, k, false, &mut rng);
        let h0 = ConvSlot::declare(&mut params, "s_inv.conv0", f, f, k, false, &mut rng);
        let h1 = ConvSlot::declare(&mut params, "s_inv.conv1", f, 2, k, true, &mut rng);
        let theta0 = config.initial_threshold.exp_m1().ln();
        let theta = params.push("theta", Array3::scalar(theta0));
        Ok(Self { config, params, slots: Slots { s0, s1, h0, h1, theta } })
    }

    /// Transforms with `Ŝ ∘ S = I` exactly: `S` splits each channel into its
    /// positive and negative parts, `Ŝ` recombines them. Needs four features.
    pub fn identity(config: IstaNetConfig) -> Result<Self> {
        if config.features < 4 {
            return Err(invalid("the identity pair needs at least 4 features"));
        }
        let mut model = Self::new(config, 0)?;
        let (f, k) = (config.features, config.kernel);
        let center = (k / 2) * k + k / 2;
        let Slots { s0, s1, h0, h1, .. } = model.slots;
        let p = &mut model.params;
        for slot in [s0, s1, h0, h1] {
            p.get_mut(slot.weight).data.fill(0.0);
            p.get_mut(slot.bias).data.fill(0.0);
        }
        let tap = |co: usize, ci: usize, cin: usize| (co * cin + ci) * k * k + center;
        for (ch, sign) in [(0, 1.0), (1, -1.0), (2, 1.0), (3, -1.0)] {
            p.get_mut(s0.weight).data[tap(ch, ch / 2, 2)] = sign;
        }
        for ch in 0..f {
            p.get_mut(s1.weight).data[tap(ch, ch, f)] = 1.0;
            p.get_mut(h0.weight).data[tap(ch, ch, f)] = 1.0;
        }
        for (ch, sign) in [(0, 1.0), (1, -1.0), (2, 1.0), (3, -1.0)] {
            p.get_mut(h1.weight).data[tap(ch / 2, ch, f)] = sign;
        }
        Ok(model)
    }

    pub fn config(&self) -> &IstaNetConfig {
        &self.config
    }

    fn transform(&self, tape: &mut Tape, pv: &[Var], x: Var, a: ConvSlot, b: ConvSlot) -> Result<Var> {
        let h = tape.conv2d(x, pv[a.weight], pv[a.bias], a.kernel)?;
        let h = tape.relu(h);
        tape.conv2d(h, pv[b.weight], pv[b.bias], b.kernel)
    }

    /// `r = x − ρ(AᴴMAx − AᴴMy)` followed by `r + Ŝ(soft(S(r), λ))`; also returns `‖Ŝ(S(r)) − r‖²`.
    fn block_on_tape(&self, tape: &mut Tape, pv: &[Var], x: Var, stack: &SliceStack, x0: Var) -> Result<(Var, Var)> {
        let c = stack.center();
        let normal = tape.linear(x, c.normal.clone());
        let g = tape.sub(normal, x0)?;
        let g = tape.scale(g, self.config.rho);
        let r = tape.sub(x, g)?;
        let sr = self.transform(tape, pv, r, self.slots.s0, self.slots.s1)?;
        let lambda = tape.softplus(pv[self.slots.theta]);
        let thr = tape.soft_threshold(sr, lambda)?;
        let back = self.transform(tape, pv, thr, self.slots.h0, self.slots.h1)?;
        let next = tape.add(r, back)?;
        let round_trip = self.transform(tape, pv, sr, self.slots.h0, self.slots.h1)?;
        let diff = tape.sub(round_trip, r)?;
        let sq = tape.mul(diff, diff)?;
        Ok((next, tape.sum(sq)))
    }

    /// Mean over blocks of `‖Ŝ(S(r_i)) − r_i‖²`.
    pub fn discrepancy_loss(&self, stack: &SliceStack) -> Result<f64> {
        let mut tape = Tape::new();
        let (_, disc) = self.record(&mut tape, stack)?;
        Ok(disc.map_or(0.0, |d| tape.value(d).data[0]))
    }

    fn record(&self, tape: &mut Tape, stack: &SliceStack) -> Result<(Var, Option<Var>)> {
        let pv = params_on_tape(tape, &self.params);
        let x0 = tape.input(Array3::from_complex(&stack.center().zero_filled));
        let mut x = x0;
        let mut disc: Option<Var> = None;
        for _ in 0..self.config.blocks {
            let (next, d) = self.block_on_tape(tape, &pv, x, stack, x0)?;
            x = next;
            disc = Some(match disc {
                Some(acc) => tape.add(acc, d)?,
                None => d,
            });
        }
        let disc = disc.map(|d| tape.scale(d, 1.0 / self.config.blocks as f64));
        Ok((x, disc))
    }
}

impl Reconstructor for IstaNetPlus {
    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    fn forward_on_tape(&self, tape: &mut Tape, stack: &SliceStack) -> Result<TapeForward> {
        let (state, disc) = self.record(tape, stack)?;
        let auxiliary = match disc {
            Some(d) if self.config.sigma > 0.0 => Some(tape.scale(d, self.config.sigma)),
            _ => None,
        };
        Ok(TapeForward { state, positions: vec![1], center: 0, auxiliary })
    }
}
