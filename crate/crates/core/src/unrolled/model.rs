use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::array::Array3;
use super::context::{SliceStack, VolumeData};
use super::params::{ConvSlot, ParamSet};
use super::tape::{softplus, Tape, Var};
use crate::error::{invalid, Result};
use crate::tensor::ComplexImage;

/// Size of one reconstruction block's multiscale transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockConfig {
    pub scales: usize,
    pub kernel: usize,
    /// Feature maps at the finest scale; doubled at every coarser one.
    pub features: usize,
}

/// Which images enter a block as input channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelLayout {
    /// 3 for the 2.5D stack, 1 for the center slice alone.
    pub slices: usize,
    pub dc_prior: bool,
    /// Data-consistency prior for every slice of the stack instead of the center only.
    pub dc_all_slices: bool,
    pub phase_prior: bool,
    pub background_prior: bool,
}

impl ChannelLayout {
    pub fn two_point_five_d() -> Self {
        Self { slices: 3, dc_prior: true, dc_all_slices: true, phase_prior: true, background_prior: true }
    }

    pub fn two_d() -> Self {
        Self { slices: 1, ..Self::two_point_five_d() }
    }

    /// Channels of the image state: real and imaginary per slice.
    pub fn image_channels(&self) -> usize {
        2 * self.slices
    }

    pub fn input_channels(&self) -> usize {
        let dc = if !self.dc_prior {
            0
        } else if self.dc_all_slices {
            2 * self.slices
        } else {
            2
        };
        self.image_channels() + dc + self.phase_prior as usize + 2 * self.background_prior as usize
    }

    /// Stack positions (0 previous, 1 center, 2 next) carried in the state.
    pub fn stack_positions(&self) -> &'static [usize] {
        if self.slices == 3 {
            &[0, 1, 2]
        } else {
            &[1]
        }
    }

    /// Index of the center slice within the state.
    pub fn center(&self) -> usize {
        if self.slices == 3 {
            1
        } else {
            0
        }
    }

    fn validate(&self) -> Result<()> {
        if self.slices != 1 && self.slices != 3 {
            return Err(invalid(format!("layouts carry 1 or 3 slices, got {}", self.slices)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// One threshold per scale and feature channel.
    #[default]
    PerChannel,
    /// One threshold per scale.
    PerScale,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub blocks: Vec<BlockConfig>,
    pub layout: ChannelLayout,
    #[serde(default)]
    pub thresholds: ThresholdMode,
    pub leaky_slope: f64,
    /// Threshold value every `λ` starts from.
    pub initial_threshold: f64,
}

impl ArchitectureSpec {
    /// `blocks` blocks cycling through `pattern`.
    pub fn alternating(blocks: usize, pattern: &[BlockConfig], layout: ChannelLayout) -> Self {
        Self {
            blocks: (0..blocks).map(|i| pattern[i % pattern.len()]).collect(),
            layout,
            thresholds: ThresholdMode::PerChannel,
            leaky_slope: 0.01,
            initial_threshold: 1e-3,
        }
    }

    /// Five blocks alternating three scales of 8 features and two scales of 16.
    pub fn desk(layout: ChannelLayout) -> Self {
        Self::alternating(
            5,
            &[BlockConfig { scales: 3, kernel: 3, features: 8 }, BlockConfig { scales: 2, kernel: 3, features: 16 }],
            layout,
        )
    }

    fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        for b in &self.blocks {
            if b.scales == 0 || b.features == 0 || b.kernel % 2 == 0 {
                return Err(invalid(format!("invalid block {b:?}: need scales, features >= 1 and an odd kernel")));
            }
        }
        if !(self.initial_threshold > 0.0) || !(self.leaky_slope >= 0.0) {
            return Err(invalid("initial threshold must be positive and the leaky slope non-negative"));
        }
        Ok(())
    }
}

/// Parameter slots of one block.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconBlockParams {
    pub config: BlockConfig,
    /// Two convolutions per scale, finest first.
    pub encoder: Vec<[ConvSlot; 2]>,
    /// Unconstrained threshold parameters per scale; `λ = softplus(θ)`.
    pub thresholds: Vec<usize>,
    /// Two convolutions for every scale but the coarsest, finest first.
    pub decoder: Vec<[ConvSlot; 2]>,
    /// Final projection back to the image channels; zero at initialization.
    pub output: ConvSlot,
}

/// Result of recording a forward pass.
pub struct TapeForward {
    /// Image state after the last block: (real, imaginary) per carried slice.
    pub state: Var,
    /// Stack position of each carried slice.
    pub positions: Vec<usize>,
    /// Index of the center slice within `state`.
    pub center: usize,
    /// Extra training term added to the loss as is.
    pub auxiliary: Option<Var>,
}

/// A trainable reconstruction network.
pub trait Reconstructor: Send + Sync {
    fn params(&self) -> &ParamSet;
    fn params_mut(&mut self) -> &mut ParamSet;
    fn forward_on_tape(&self, tape: &mut Tape, stack: &SliceStack) -> Result<TapeForward>;

    /// Center-slice reconstruction.
    fn reconstruct(&self, stack: &SliceStack) -> Result<ComplexImage> {
        let mut tape = Tape::new();
        let fwd = self.forward_on_tape(&mut tape, stack)?;
        Ok(tape.value(fwd.state).to_complex(fwd.center))
    }
}

/// Every slice of a volume, in order.
pub fn reconstruct_volume(model: &dyn Reconstructor, volume: &VolumeData) -> Result<Vec<ComplexImage>> {
    (0..volume.len()).map(|i| model.reconstruct(&volume.stack(i))).collect()
}

pub(crate) fn params_on_tape(tape: &mut Tape, params: &ParamSet) -> Vec<Var> {
    params.tensors().iter().enumerate().map(|(s, t)| tape.param(s, t.clone())).collect()
}

/// Unrolled network of independent multiscale residual blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct UnrolledModel {
    spec: ArchitectureSpec,
    params: ParamSet,
    blocks: Vec<ReconBlockParams>,
}

fn inverse_softplus(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

impl UnrolledModel {
    pub fn new(spec: ArchitectureSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamSet::new();
        let cin = spec.layout.input_channels();
        let cimg = spec.layout.image_channels();
        let theta0 = inverse_softplus(spec.initial_threshold);
        let mut blocks = Vec::with_capacity(spec.blocks.len());
        for (b, cfg) in spec.blocks.iter().enumerate() {
            let k = cfg.kernel;
            let feats = |s: usize| cfg.features << s;
            let mut encoder = Vec::new();
            let mut thresholds = Vec::new();
            for s in 0..cfg.scales {
                let prev = if s == 0 { cin } else { feats(s - 1) };
                let name = format!("block{b}.enc{s}");
                encoder.push([
                    ConvSlot::declare(&mut params, &format!("{name}.conv0"), prev, feats(s), k, false, &mut rng),
                    ConvSlot::declare(&mut params, &format!("{name}.conv1"), feats(s), feats(s), k, false, &mut rng),
                ]);
                let n = match spec.thresholds {
                    ThresholdMode::PerChannel => feats(s),
                    ThresholdMode::PerScale => 1,
                };
                thresholds.push(params.push(format!("block{b}.theta{s}"), Array3 { c: n, h: 1, w: 1, data: vec![theta0; n] }));
            }
            let mut decoder = Vec::new();
            for s in 0..cfg.scales - 1 {
                let name = format!("block{b}.dec{s}");
                decoder.push([
                    ConvSlot::declare(&mut params, &format!("{name}.conv0"), feats(s + 1) + feats(s), feats(s), k, false, &mut rng),
                    ConvSlot::declare(&mut params, &format!("{name}.conv1"), feats(s), feats(s), k, false, &mut rng),
                ]);
            }
            let output = ConvSlot::declare(&mut params, &format!("block{b}.out"), feats(0), cimg, k, true, &mut rng);
            blocks.push(ReconBlockParams { config: *cfg, encoder, thresholds, decoder, output });
        }
        Ok(Self { spec, params, blocks })
    }

    pub fn spec(&self) -> &ArchitectureSpec {
        &self.spec
    }

    pub fn blocks(&self) -> &[ReconBlockParams] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Current thresholds `λ = softplus(θ)` of block `b`, scale `s`.
    pub fn thresholds(&self, b: usize, s: usize) -> Vec<f64> {
        self.params.get(self.blocks[b].thresholds[s]).data.iter().map(|&t| softplus(t)).collect()
    }

    /// Initial state: zero-filled reconstructions of the carried slices.
    pub fn initial_state(&self, stack: &SliceStack) -> Array3 {
        let images: Vec<ComplexImage> =
            self.spec.layout.stack_positions().iter().map(|&p| stack.slices[p].zero_filled.clone()).collect();
        Array3::from_complex_stack(&images)
    }

    fn check_stack(&self, stack: &SliceStack) -> Result<()> {
        let shape = stack.shape();
        if stack.slices.iter().any(|s| s.shape() != shape) {
            return Err(invalid("stack slices differ in shape"));
        }
        Ok(())
    }

    /// Records block `b` applied to state `x`.
    pub fn block_on_tape(&self, tape: &mut Tape, pv: &[Var], b: usize, x: Var, stack: &SliceStack, x0: &[Var]) -> Result<Var> {
        let layout = &self.spec.layout;
        let (c, h, w) = tape.value(x).shape();
        if c != layout.image_channels() || (h, w) != stack.shape() || x0.len() != layout.slices {
            return Err(invalid(format!("state {:?} does not match the {}-slice layout", (c, h, w), layout.slices)));
        }
        let block = &self.blocks[b];
        let slope = self.spec.leaky_slope;
        let positions = layout.stack_positions();
        let center = layout.center();
        let mut inputs = vec![x];
        let slice_of = |tape: &mut Tape, i: usize| tape.channels(x, 2 * i, 2);
        if layout.dc_prior {
            let carried: Vec<usize> = if layout.dc_all_slices { (0..layout.slices).collect() } else { vec![center] };
            for i in carried {
                let xi = slice_of(tape, i)?;
                let normal = tape.linear(xi, stack.slices[positions[i]].normal.clone());
                inputs.push(tape.sub(normal, x0[i])?);
            }
        }
        let xc = slice_of(tape, center)?;
        if layout.phase_prior {
            inputs.push(tape.linear(xc, stack.center().phase.clone()));
        }
        if layout.background_prior {
            inputs.push(tape.linear(xc, stack.center().background.clone()));
        }
        let mut hcur = tape.concat(&inputs)?;

        let conv = |tape: &mut Tape, v: Var, slot: &ConvSlot| tape.conv2d(v, pv[slot.weight], pv[slot.bias], slot.kernel);
        let mut skips = Vec::with_capacity(block.config.scales);
        for (s, [c0, c1]) in block.encoder.iter().enumerate() {
            if s > 0 {
                hcur = tape.maxpool2(hcur)?;
            }
            let a = conv(tape, hcur, c0)?;
            let a = tape.leaky_relu(a, slope);
            let a = conv(tape, a, c1)?;
            hcur = tape.leaky_relu(a, slope);
            let lambda = tape.softplus(pv[block.thresholds[s]]);
            skips.push(tape.soft_threshold(hcur, lambda)?);
        }
        let mut d = *skips.last().expect("at least one scale");
        for s in (0..block.config.scales - 1).rev() {
            let skip = skips[s];
            let (_, sh, sw) = tape.value(skip).shape();
            let up = tape.upsample2(d, sh, sw);
            let cat = tape.concat(&[up, skip])?;
            let [c0, c1] = &block.decoder[s];
            let a = conv(tape, cat, c0)?;
            let a = tape.leaky_relu(a, slope);
            let a = conv(tape, a, c1)?;
            d = tape.leaky_relu(a, slope);
        }
        let out = conv(tape, d, &block.output)?;
        tape.add(x, out)
    }

    /// States `x_0, …, x_b` on a tape, returning the variables of each.
    pub fn states_on_tape(&self, tape: &mut Tape, stack: &SliceStack) -> Result<Vec<Var>> {
        self.check_stack(stack)?;
        let pv = params_on_tape(tape, &self.params);
        let positions = self.spec.layout.stack_positions();
        let x0: Vec<Var> =
            positions.iter().map(|&p| tape.input(Array3::from_complex(&stack.slices[p].zero_filled))).collect();
        let mut x = tape.concat(&x0)?;
        let mut states = vec![x];
        for b in 0..self.blocks.len() {
            x = self.block_on_tape(tape, &pv, b, x, stack, &x0)?;
            states.push(x);
        }
        Ok(states)
    }

    /// Value of every state `x_0, …, x_b`.
    pub fn forward_states(&self, stack: &SliceStack) -> Result<Vec<Array3>> {
        let mut tape = Tape::new();
        let states = self.states_on_tape(&mut tape, stack)?;
        Ok(states.iter().map(|&v| tape.value(v).clone()).collect())
    }

    /// One block applied to an explicit state (one complex image per carried slice).
    pub fn block_forward(&self, b: usize, state: &[ComplexImage], stack: &SliceStack) -> Result<Vec<ComplexImage>> {
        if b >= self.blocks.len() {
            return Err(invalid(format!("block {b} of {}", self.blocks.len())));
        }
        if state.len() != self.spec.layout.slices {
            return Err(invalid(format!("{} state slices for a {}-slice layout", state.len(), self.spec.layout.slices)));
        }
        let mut tape = Tape::new();
        let pv = params_on_tape(&mut tape, &self.params);
        let positions = self.spec.layout.stack_positions();
        let x0: Vec<Var> =
            positions.iter().map(|&p| tape.input(Array3::from_complex(&stack.slices[p].zero_filled))).collect();
        let x = tape.input(Array3::from_complex_stack(state));
        let out = self.block_on_tape(&mut tape, &pv, b, x, stack, &x0)?;
        let v = tape.value(out);
        Ok((0..state.len()).map(|i| v.to_complex(i)).collect())
    }

    /// Center-slice reconstruction.
    pub fn model_forward(&self, stack: &SliceStack) -> Result<ComplexImage> {
        self.reconstruct(stack)
    }
}

impl Reconstructor for UnrolledModel {
    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    fn forward_on_tape(&self, tape: &mut Tape, stack: &SliceStack) -> Result<TapeForward> {
        let states = self.states_on_tape(tape, stack)?;
        Ok(TapeForward {
            state: *states.last().expect("initial state"),
            positions: self.spec.layout.stack_positions().to_vec(),
            center: self.spec.layout.center(),
            auxiliary: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_phantom, simulate_acquisition};
    use rand::Rng;

    fn volume(n: usize, slices: usize, coils: usize, seed: u64) -> VolumeData {
        let v = make_phantom(n, slices, coils, seed).unwrap();
        VolumeData::from_acquisition(&simulate_acquisition(&v, 4.0, 0.08, seed + 1).unwrap()).unwrap()
    }

    fn small_spec(blocks: usize, layout: ChannelLayout) -> ArchitectureSpec {
        ArchitectureSpec::alternating(
            blocks,
            &[BlockConfig { scales: 2, kernel: 3, features: 4 }, BlockConfig { scales: 1, kernel: 3, features: 4 }],
            layout,
        )
    }

    /// Every zero-initialized parameter gets a random value so all paths are active.
    fn randomize(model: &mut UnrolledModel, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let flat: Vec<f64> =
            model.params().flatten().into_iter().map(|p| if p == 0.0 { rng.gen_range(-0.1..0.1) } else { p }).collect();
        model.params_mut().assign(&flat).unwrap();
    }

    #[test]
    fn layouts_count_channels() {
        assert_eq!(ChannelLayout::two_point_five_d().input_channels(), 15);
        assert_eq!(ChannelLayout { dc_all_slices: false, ..ChannelLayout::two_point_five_d() }.input_channels(), 11);
        assert_eq!(ChannelLayout::two_d().input_channels(), 7);
        let bad = ChannelLayout { slices: 2, ..ChannelLayout::two_d() };
        assert!(UnrolledModel::new(small_spec(1, bad), 0).is_err());
    }

    #[test]
    fn fresh_models_return_the_zero_filled_image_bitwise() {
        let vol = volume(16, 3, 4, 3);
        let stack = vol.stack(1);
        for b in [0, 1, 5, 10] {
            let model = UnrolledModel::new(small_spec(b, ChannelLayout::two_point_five_d()), 9).unwrap();
            assert_eq!(model.model_forward(&stack).unwrap(), stack.center().zero_filled);
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let vol = volume(16, 3, 2, 5);
        let mut a = UnrolledModel::new(small_spec(2, ChannelLayout::two_point_five_d()), 4).unwrap();
        randomize(&mut a, 1);
        let mut b = UnrolledModel::new(small_spec(2, ChannelLayout::two_point_five_d()), 4).unwrap();
        randomize(&mut b, 1);
        let ra = a.model_forward(&vol.stack(1)).unwrap();
        assert_eq!(ra, a.model_forward(&vol.stack(1)).unwrap());
        assert_eq!(ra, b.model_forward(&vol.stack(1)).unwrap());
        assert_eq!(ra.shape(), (16, 16));
        assert_ne!(ra, vol.stack(1).center().zero_filled);
    }

    #[test]
    fn perturbing_a_block_leaves_earlier_states_untouched() {
        let vol = volume(16, 3, 2, 6);
        let stack = vol.stack(1);
        let mut model = UnrolledModel::new(small_spec(3, ChannelLayout::two_point_five_d()), 2).unwrap();
        randomize(&mut model, 3);
        let before = model.forward_states(&stack).unwrap();
        let slot = model.blocks()[1].encoder[0][0].weight;
        model.params_mut().get_mut(slot).data[0] += 0.05;
        let after = model.forward_states(&stack).unwrap();
        assert_eq!(before[..2], after[..2]);
        assert_ne!(before[2], after[2]);
    }

    #[test]
    fn saturated_thresholds_leave_a_constant_update() {
        let vol = volume(16, 3, 2, 7);
        let stack = vol.stack(1);
        let mut model = UnrolledModel::new(small_spec(1, ChannelLayout::two_point_five_d()), 5).unwrap();
        randomize(&mut model, 8);
        for s in model.blocks()[0].thresholds.clone() {
            model.params_mut().get_mut(s).data.fill(1e6);
        }
        let zf: Vec<ComplexImage> = stack.slices.iter().map(|s| s.zero_filled.clone()).collect();
        let other: Vec<ComplexImage> = zf.iter().map(|x| x.scale(0.3)).collect();
        let step = |state: &[ComplexImage]| -> Vec<ComplexImage> {
            let out = model.block_forward(0, state, &stack).unwrap();
            out.iter().zip(state).map(|(o, x)| o.sub(x).unwrap()).collect()
        };
        let (u, v) = (step(&zf), step(&other));
        for (a, b) in u.iter().zip(&v) {
            assert!(a.sub(b).unwrap().max_abs() < 1e-12);
        }
        assert!(u[1].max_abs() > 0.0);
    }

    #[test]
    fn larger_thresholds_shrink_features() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut tape = Tape::new();
        let x = tape.input(Array3::new(2, 4, 4, (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap());
        let mut last = f64::INFINITY;
        for lam in [0.0, 0.1, 0.3, 0.7, 2.0] {
            let l = tape.input(Array3::new(2, 1, 1, vec![lam, lam / 2.0]).unwrap());
            let y = tape.soft_threshold(x, l).unwrap();
            let norm: f64 = tape.value(y).data.iter().map(|v| v.abs()).sum();
            assert!(norm <= last);
            last = norm;
        }
        assert_eq!(last, 0.0);
    }

    #[test]
    fn volume_edges_reconstruct_with_replicated_neighbors() {
        let vol = volume(16, 3, 2, 9);
        let mut model = UnrolledModel::new(small_spec(1, ChannelLayout::two_point_five_d()), 1).unwrap();
        randomize(&mut model, 2);
        let recon = reconstruct_volume(&model, &vol).unwrap();
        assert_eq!(recon.len(), 3);
        let first = SliceStack::new(vol.slices[0].clone(), vol.slices[0].clone(), vol.slices[1].clone()).unwrap();
        assert_eq!(recon[0], model.model_forward(&first).unwrap());
        let last = SliceStack::new(vol.slices[1].clone(), vol.slices[2].clone(), vol.slices[2].clone()).unwrap();
        assert_eq!(recon[2], model.model_forward(&last).unwrap());
    }

    #[test]
    fn two_d_layout_ignores_neighbors() {
        let vol = volume(16, 3, 2, 10);
        let mut model = UnrolledModel::new(small_spec(2, ChannelLayout::two_d()), 1).unwrap();
        randomize(&mut model, 2);
        let stack = vol.stack(1);
        let alone = SliceStack::single(vol.slices[1].clone());
        assert_eq!(model.model_forward(&stack).unwrap(), model.model_forward(&alone).unwrap());
    }

    #[test]
    fn block_forward_matches_the_recorded_chain() {
        let vol = volume(16, 3, 2, 11);
        let stack = vol.stack(0);
        let mut model = UnrolledModel::new(small_spec(2, ChannelLayout::two_point_five_d()), 3).unwrap();
        randomize(&mut model, 4);
        let states = model.forward_states(&stack).unwrap();
        let mut x: Vec<ComplexImage> = stack.slices.iter().map(|s| s.zero_filled.clone()).collect();
        for b in 0..2 {
            x = model.block_forward(b, &x, &stack).unwrap();
        }
        for (i, xi) in x.iter().enumerate() {
            assert_eq!(*xi, states[2].to_complex(i));
        }
        assert!(model.block_forward(2, &x, &stack).is_err());
        assert!(model.block_forward(0, &x[..1], &stack).is_err());
    }

    #[test]
    fn gradients_match_finite_differences_on_a_parameter_sample() {
        let vol = volume(16, 3, 2, 12);
        let stack = vol.stack(1);
        let mut spec = small_spec(1, ChannelLayout::two_point_five_d());
        spec.initial_threshold = 0.2;
        let mut model = UnrolledModel::new(spec, 5).unwrap();
        randomize(&mut model, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let wv = Array3::new(6, 16, 16, (0..1536).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let eval = |m: &UnrolledModel| {
            let mut tape = Tape::new();
            let state = m.states_on_tape(&mut tape, &stack).unwrap()[1];
            let w = tape.input(wv.clone());
            let p = tape.mul(state, w).unwrap();
            let l = tape.sum(p);
            (tape.value(l).data[0], tape.backward(l, m.params().slots()).unwrap())
        };
        let (_, grads) = eval(&model);
        let grad = crate::unrolled::flatten_grads(model.params(), &grads);
        let flat = model.params().flatten();
        let h = 1e-4;
        for i in (0..flat.len()).step_by(37) {
            let mut p = flat.clone();
            p[i] += h;
            model.params_mut().assign(&p).unwrap();
            let up = eval(&model).0;
            p[i] -= 2.0 * h;
            model.params_mut().assign(&p).unwrap();
            let down = eval(&model).0;
            let fd = (up - down) / (2.0 * h);
            let scale = fd.abs().max(grad[i].abs()).max(1e-6);
            assert!((fd - grad[i]).abs() / scale < 1e-4, "param {i}: {} vs {fd}", grad[i]);
        }
    }
}
