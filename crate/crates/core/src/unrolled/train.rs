use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::context::SliceStack;
use super::loss::combined_loss_on_tape;
use super::model::Reconstructor;
use super::optim::{Optimizer, OptimizerConfig};
use super::params::ParamSet;
use super::tape::{ParamGrads, Tape};
use crate::error::{invalid, Result};
use crate::metrics::{MsSsimParams, SsimParams, DEFAULT_ALPHA};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr: f64,
    /// Multiplicative learning-rate decay per epoch.
    pub decay: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    pub alpha: f64,
    pub optimizer: OptimizerConfig,
    /// Loss weight of the neighboring slices; 0 trains on the center slice only.
    pub neighbor_loss_weight: f64,
    /// Worker threads for per-sample gradients. Results do not depend on it.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            decay: 0.95,
            epochs: 30,
            batch: 1,
            seed: 0,
            alpha: DEFAULT_ALPHA,
            optimizer: OptimizerConfig::default(),
            neighbor_loss_weight: 0.0,
            threads: 1,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0) || !(self.decay > 0.0 && self.decay <= 1.0) || self.batch == 0 {
            return Err(invalid("training needs lr >= 0, decay in (0, 1] and batch >= 1"));
        }
        if !(0.0..=1.0).contains(&self.alpha) || !(self.neighbor_loss_weight >= 0.0) {
            return Err(invalid("alpha must lie in [0, 1] and the neighbor weight be non-negative"));
        }
        Ok(())
    }
}

/// Where a training run stands; stored in checkpoints so runs can resume.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainProgress {
    pub epoch: usize,
    pub step: usize,
}

/// Mean loss of one optimizer step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrainRecord {
    pub epoch: usize,
    pub step: usize,
    pub lr: f64,
    pub loss: f64,
}

/// Training loss of one stack and its parameter gradients.
pub fn sample_loss(model: &dyn Reconstructor, stack: &SliceStack, alpha: f64, neighbor_weight: f64) -> Result<(f64, ParamGrads)> {
    let mut tape = Tape::new();
    let fwd = model.forward_on_tape(&mut tape, stack)?;
    let shape = stack.shape();
    let ms = MsSsimParams::fitting(shape, SsimParams::default())?;
    let slice_loss = |tape: &mut Tape, i: usize| {
        let target = stack.slices[fwd.positions[i]].target.as_ref().ok_or_else(|| invalid("training slice without a target"))?;
        let x = tape.channels(fwd.state, 2 * i, 2)?;
        let mag = tape.complex_abs(x)?;
        combined_loss_on_tape(tape, mag, target, alpha, &ms)
    };
    let mut loss = slice_loss(&mut tape, fwd.center)?;
    if neighbor_weight > 0.0 {
        for i in (0..fwd.positions.len()).filter(|&i| i != fwd.center) {
            let l = slice_loss(&mut tape, i)?;
            let l = tape.scale(l, neighbor_weight);
            loss = tape.add(loss, l)?;
        }
    }
    if let Some(aux) = fwd.auxiliary {
        loss = tape.add(loss, aux)?;
    }
    let grads = tape.backward(loss, model.params().slots())?;
    Ok((tape.value(loss).data[0], grads))
}

/// Gradients as one vector in parameter declaration order; unused slots are zero.
pub fn flatten_grads(params: &ParamSet, grads: &ParamGrads) -> Vec<f64> {
    let mut flat = Vec::with_capacity(params.count());
    for (s, t) in params.tensors().iter().enumerate() {
        match grads.get(s) {
            Some(g) if g.len() == t.len() => flat.extend_from_slice(&g.data),
            _ => flat.extend(std::iter::repeat(0.0).take(t.len())),
        }
    }
    flat
}

pub fn train<M: Reconstructor>(model: &mut M, data: &[SliceStack], config: &TrainConfig) -> Result<Vec<TrainRecord>> {
    train_from(model, data, config, TrainProgress::default()).map(|(history, _)| history)
}

/// Runs `config.epochs` further epochs after `start`. Optimizer moments start from zero.
pub fn train_from<M: Reconstructor>(
    model: &mut M,
    data: &[SliceStack],
    config: &TrainConfig,
    start: TrainProgress,
) -> Result<(Vec<TrainRecord>, TrainProgress)> {
    config.validate()?;
    if data.is_empty() {
        return Err(invalid("training needs at least one slice"));
    }
    let mut optimizer = Optimizer::new(config.optimizer, model.params().count())?;
    let pool = (config.threads > 1)
        .then(|| rayon::ThreadPoolBuilder::new().num_threads(config.threads).build())
        .transpose()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    let mut progress = start;
    let mut history = Vec::new();
    for epoch in start.epoch..start.epoch + config.epochs {
        let lr = config.lr * config.decay.powi(epoch as i32);
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(epoch as u64)));
        for chunk in order.chunks(config.batch) {
            let shared: &M = model;
            let one = |&i: &usize| sample_loss(shared, &data[i], config.alpha, config.neighbor_loss_weight);
            let results: Vec<Result<(f64, ParamGrads)>> = match &pool {
                Some(pool) => pool.install(|| chunk.par_iter().map(one).collect()),
                None => chunk.iter().map(one).collect(),
            };
            let scale = 1.0 / chunk.len() as f64;
            let mut loss = 0.0;
            let mut grad = vec![0.0; model.params().count()];
            for r in results {
                let (l, g) = r?;
                loss += l * scale;
                for (a, b) in grad.iter_mut().zip(flatten_grads(model.params(), &g)) {
                    *a += b * scale;
                }
            }
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(invalid(format!("training diverged at step {}", progress.step)));
            }
            let mut flat = model.params().flatten();
            optimizer.step(&mut flat, &grad, lr);
            model.params_mut().assign(&flat)?;
            history.push(TrainRecord { epoch, step: progress.step, lr, loss });
            progress.step += 1;
        }
        progress.epoch = epoch + 1;
    }
    Ok((history, progress))
}

/// Mean loss of every epoch present in `history`, in order.
pub fn epoch_means(history: &[TrainRecord]) -> Vec<f64> {
    let mut out: Vec<(usize, f64, usize)> = Vec::new();
    for r in history {
        match out.last_mut() {
            Some((e, sum, n)) if *e == r.epoch => {
                *sum += r.loss;
                *n += 1;
            }
            _ => out.push((r.epoch, r.loss, 1)),
        }
    }
    out.into_iter().map(|(_, s, n)| s / n as f64).collect()
}
