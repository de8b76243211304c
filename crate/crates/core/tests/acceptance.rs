//! Acceptance criteria.
//!
//! Every test writes one `PASS`/`FAIL` line straight to stderr (so it shows
//! even when output is captured) and then asserts. A shared lock runs the
//! criteria one at a time so the runtime budgets measure a single job.

use std::io::Write;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use csmri::data::{make_phantom, simulate_acquisition};
use csmri::kspace::{make_cartesian_mask, MultiCoilKSpace, SamplingMask, SenseOperator};
use csmri::metrics::{msssim, nmse, psnr, ssim, MsSsimParams, SsimParams};
use csmri::priors::{combined_lowpass, dc_prior, phase_prior};
use csmri::sparsity::{ista_solve, soft_threshold_real, wavelet_forward, wavelet_inverse, IstaConfig};
use csmri::tensor::{fft2c, ifft2c, Complex64, ComplexImage, RealImage};
use csmri::unrolled::{
    flatten_grads, reconstruct_volume, train, Array3, ArchitectureSpec, BlockConfig, ChannelLayout, Reconstructor, SliceStack, Tape,
    TrainConfig, UnrolledModel, Var, VolumeData,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "acceptance {id:>2} {status} {name}: {detail}");
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn random_complex(rng: &mut ChaCha8Rng, h: usize, w: usize) -> ComplexImage {
    ComplexImage::from_fn(h, w, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn volume(size: usize, slices: usize, coils: usize, seed: u64) -> VolumeData {
    let v = make_phantom(size, slices, coils, 1000 + seed).unwrap();
    VolumeData::from_acquisition(&simulate_acquisition(&v, 4.0, 0.08, 5000 + seed).unwrap()).unwrap()
}

fn max_diff(a: &ComplexImage, b: &ComplexImage) -> f64 {
    a.sub(b).unwrap().max_abs()
}

#[test]
fn c01_transforms() {
    let _guard = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for (h, w) in [(64, 64), (33, 47), (32, 48), (1, 16)] {
        for _ in 0..5 {
            let x = random_complex(&mut rng, h, w);
            let y = random_complex(&mut rng, h, w);
            let fx = fft2c(&x).unwrap();
            worst = worst.max(max_diff(&ifft2c(&fx).unwrap(), &x));
            worst = worst.max(max_diff(&fft2c(&ifft2c(&x).unwrap()).unwrap(), &x));
            worst = worst.max((fx.norm_sqr() - x.norm_sqr()).abs() / x.norm_sqr());
            let lhs = fx.dot(&y).unwrap();
            let rhs = x.dot(&ifft2c(&y).unwrap()).unwrap();
            worst = worst.max((lhs - rhs).norm() / (x.norm() * y.norm()));
        }
    }
    for (h, w, levels) in [(64, 64, 3), (32, 48, 4), (16, 8, 1), (24, 40, 3)] {
        for _ in 0..5 {
            let x = random_complex(&mut rng, h, w);
            let y = random_complex(&mut rng, h, w);
            let cx = wavelet_forward(&x, levels).unwrap();
            worst = worst.max(max_diff(&wavelet_inverse(&cx).unwrap(), &x));
            worst = worst.max((cx.norm_sqr() - x.norm_sqr()).abs() / x.norm_sqr());
            let sum = wavelet_forward(&x.add(&y).unwrap(), levels).unwrap().norm_sqr();
            let diff = wavelet_forward(&x.sub(&y).unwrap(), levels).unwrap().norm_sqr();
            let re = x.dot(&y).unwrap().re;
            worst = worst.max(((sum - diff) / 4.0 - re).abs() / (x.norm() * y.norm()));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(1, "transforms", worst < 1e-10 && secs < 5.0, &format!("max error {worst:.2e} (< 1e-10), {secs:.2}s (< 5s)"));
}

#[test]
fn c02_soft_threshold_minimizes_the_prox_objective() {
    let _guard = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let step = 1e-4;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let u: f64 = rng.gen_range(-3.0..3.0);
        let lam: f64 = rng.gen_range(0.0..2.0);
        let objective = |v: f64| 0.5 * (v - u) * (v - u) + lam * v.abs();
        let (mut best, mut best_val) = (0.0, f64::INFINITY);
        for k in -35_000i64..=35_000 {
            let v = k as f64 * step;
            let f = objective(v);
            if f < best_val {
                best = v;
                best_val = f;
            }
        }
        worst = worst.max((soft_threshold_real(u, lam).unwrap() - best).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        2,
        "soft-threshold vs grid search",
        worst <= 2e-4 && secs < 10.0,
        &format!("max deviation {worst:.2e} (<= 2e-4) over 1000 instances, {secs:.2}s (< 10s)"),
    );
}

#[test]
fn c03_ista_is_monotone_and_converges() {
    let _guard = serial();
    let start = Instant::now();
    let mut increases = 0;
    let mut worst_gap = 0.0f64;
    let mut within = 0;
    for seed in 0..10 {
        let vol = make_phantom(32, 1, 4, 300 + seed).unwrap();
        let acq = simulate_acquisition(&vol, 4.0, 0.08, 400 + seed).unwrap();
        let y = &acq.kspace[0];
        let op = SenseOperator::for_kspace(y).unwrap();
        let cfg = IstaConfig { iters: 10_000, ..IstaConfig::default() };
        let trace = ista_solve(y, &op, &cfg).unwrap().trace;
        let tol = 1e-12 * trace[0].total;
        increases += trace.windows(2).filter(|p| p[1].total > p[0].total + tol).count();
        let reference = trace[10_000].total;
        let gap = (trace[300].total - reference) / reference;
        within += usize::from(gap <= 0.01);
        worst_gap = worst_gap.max(gap);
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        3,
        "ISTA monotonicity and fidelity",
        increases == 0 && worst_gap <= 0.01 && secs < 120.0,
        &format!(
            "{increases} objective increases, 300-iteration gap within 1% on {within}/10 problems (worst {:.3}%), {secs:.1}s (< 120s)",
            100.0 * worst_gap
        ),
    );
}

/// Replaces every zero-valued parameter with a draw from `±0.1`.
fn randomize(model: &mut UnrolledModel, seed: u64, keep_zero: &[usize]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut offset = 0;
    let mut flat = model.params().flatten();
    for slot in 0..model.params().slots() {
        let n = model.params().get(slot).len();
        if !keep_zero.contains(&slot) {
            for p in &mut flat[offset..offset + n] {
                if *p == 0.0 {
                    *p = rng.gen_range(-0.1..0.1);
                }
            }
        }
        offset += n;
    }
    model.params_mut().assign(&flat).unwrap();
}

/// Evaluation point of the gradient check: a stack, a starting state away
/// from the zero-filled image (so the data-consistency channels are not
/// identically zero) and the weights of a linear loss on the final state.
struct GradProblem {
    stack: SliceStack,
    start: Array3,
    weights: Array3,
}

impl GradProblem {
    fn record(&self, model: &UnrolledModel, tape: &mut Tape) -> Var {
        let pv: Vec<Var> = (0..model.params().slots()).map(|s| tape.param(s, model.params().get(s).clone())).collect();
        let positions = model.spec().layout.stack_positions();
        let x0: Vec<Var> =
            positions.iter().map(|&p| tape.input(Array3::from_complex(&self.stack.slices[p].zero_filled))).collect();
        let mut x = tape.input(self.start.clone());
        for b in 0..model.num_blocks() {
            x = model.block_on_tape(tape, &pv, b, x, &self.stack, &x0).unwrap();
        }
        let w = tape.input(self.weights.clone());
        let product = tape.mul(x, w).unwrap();
        tape.sum(product)
    }

    fn loss(&self, model: &UnrolledModel) -> (f64, Vec<usize>) {
        let mut tape = Tape::new();
        let loss = self.record(model, &mut tape);
        (tape.value(loss).data[0], tape.branch_pattern())
    }

    fn gradient(&self, model: &UnrolledModel) -> Vec<f64> {
        let mut tape = Tape::new();
        let loss = self.record(model, &mut tape);
        flatten_grads(model.params(), &tape.backward(loss, model.params().slots()).unwrap())
    }
}

/// Midpoint of the widest gap between consecutive sorted values whose ranks
/// lie between the `lo` and `hi` quantiles.
fn widest_gap_midpoint(mut values: Vec<f64>, lo: f64, hi: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let (a, b) = ((lo * n as f64) as usize, ((hi * n as f64) as usize).min(n - 1));
    let i = (a..b).max_by(|&i, &j| (values[i + 1] - values[i]).total_cmp(&(values[j + 1] - values[j]))).unwrap();
    0.5 * (values[i] + values[i + 1])
}

/// Moves every leaky-ReLU input and soft-threshold kink into a wide gap of
/// the values it sees: each bias is shifted so zero falls in the widest gap
/// of its channel's pre-activations, and each threshold is placed in the
/// widest gap of the upper half of its channel's magnitudes. Nodes are
/// handled in recording order, since each one changes everything after it.
fn place_kinks_in_gaps(model: &mut UnrolledModel, problem: &GradProblem) {
    enum Step {
        Bias(usize, usize),
        Threshold(usize, usize),
    }
    let mut steps = Vec::new();
    let (mut leaky, mut shrink) = (0, 0);
    for block in model.blocks() {
        for (s, convs) in block.encoder.iter().enumerate() {
            for conv in convs {
                steps.push(Step::Bias(leaky, conv.bias));
                leaky += 1;
            }
            steps.push(Step::Threshold(shrink, block.thresholds[s]));
            shrink += 1;
        }
        for convs in block.decoder.iter().rev() {
            for conv in convs {
                steps.push(Step::Bias(leaky, conv.bias));
                leaky += 1;
            }
        }
    }
    for step in steps {
        let mut tape = Tape::new();
        problem.record(model, &mut tape);
        match step {
            Step::Bias(node, slot) => {
                let u = tape.leaky_relu_inputs()[node].clone();
                for c in 0..u.c {
                    model.params_mut().get_mut(slot).data[c] -= widest_gap_midpoint(u.channel(c).to_vec(), 0.1, 0.9);
                }
            }
            Step::Threshold(node, slot) => {
                let u = tape.soft_threshold_inputs()[node].clone();
                for c in 0..u.c {
                    let lambda = widest_gap_midpoint(u.channel(c).iter().map(|v| v.abs()).collect(), 0.5, 0.9);
                    model.params_mut().get_mut(slot).data[c] = lambda.exp_m1().ln();
                }
            }
        }
    }
}

/// Worst relative error, number of parameters whose `±h` evaluations change
/// branch at some non-smooth node, and parameter count.
fn gradient_check(blocks: usize, seed: u64) -> (f64, usize, usize, usize) {
    let vol = volume(16, 3, 4, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = ArchitectureSpec::alternating(
        blocks,
        &[BlockConfig { scales: 2, kernel: 3, features: 4 }],
        ChannelLayout::two_point_five_d(),
    );
    let mut model = UnrolledModel::new(spec, seed).unwrap();
    randomize(&mut model, seed, &[]);
    let gain = 3.0;
    let scaled: Vec<f64> = model.params().flatten().iter().map(|p| gain * p).collect();
    model.params_mut().assign(&scaled).unwrap();
    let stack = vol.stack(1);
    let mut start = model.initial_state(&stack);
    start.data.iter_mut().for_each(|v| *v += rng.gen_range(-0.05..0.05));
    let weights = Array3::new(6, 16, 16, (0..6 * 256).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let problem = GradProblem { stack, start, weights };
    place_kinks_in_gaps(&mut model, &problem);

    let grad = problem.gradient(&model);
    let (_, base) = problem.loss(&model);
    let flat = model.params().flatten();
    let h = 1e-4;
    let (mut worst, mut crossings) = (0.0f64, 0);
    for i in 0..flat.len() {
        let mut p = flat.clone();
        p[i] += h;
        model.params_mut().assign(&p).unwrap();
        let (up, up_branches) = problem.loss(&model);
        p[i] -= 2.0 * h;
        model.params_mut().assign(&p).unwrap();
        let (down, down_branches) = problem.loss(&model);
        crossings += usize::from(up_branches != base || down_branches != base);
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-6));
    }
    let active = grad.iter().filter(|g| g.abs() > 1e-6).count();
    (worst, crossings, active, flat.len())
}

#[test]
fn c04_gradients_match_central_differences() {
    let _guard = serial();
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for blocks in [1, 2] {
        let (worst, crossings, active, n) = gradient_check(blocks, 12);
        pass &= worst < 1e-4;
        details.push(format!(
            "{blocks} block(s): max relative error {worst:.2e} over {n} parameters ({active} with |g| > 1e-6, {crossings} kink crossings)"
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    report(4, "gradient check", pass && secs < 300.0, &format!("{} (< 1e-4), {secs:.1}s (< 300s)", details.join("; ")));
}

#[test]
fn c05_zero_output_layers_give_the_zero_filled_image() {
    let _guard = serial();
    let vol = volume(32, 3, 4, 21);
    let stack = vol.stack(1);
    let desk = ArchitectureSpec::desk(ChannelLayout::two_point_five_d());
    let mut identical = Vec::new();
    for blocks in [1, 5, 10] {
        let mut model = UnrolledModel::new(ArchitectureSpec { blocks: desk.blocks.iter().cycle().take(blocks).copied().collect(), ..desk.clone() }, 3).unwrap();
        let outputs: Vec<usize> = model.blocks().iter().flat_map(|b| [b.output.weight, b.output.bias]).collect();
        randomize(&mut model, 4, &outputs);
        identical.push(model.model_forward(&stack).unwrap() == stack.center().zero_filled);
    }
    report(
        5,
        "residual identity",
        identical.iter().all(|&b| b),
        &format!("bitwise equal for b = 1, 5, 10: {identical:?}"),
    );
}

mod oracle {
    //! Metric definitions evaluated pixel by pixel.

    pub type Img = Vec<Vec<f64>>;

    pub fn nmse(r: &Img, t: &Img) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (rr, tr) in r.iter().zip(t) {
            for (a, b) in rr.iter().zip(tr) {
                num += (a - b) * (a - b);
                den += b * b;
            }
        }
        num / den
    }

    pub fn psnr(r: &Img, t: &Img) -> f64 {
        let n = (t.len() * t[0].len()) as f64;
        let peak = t.iter().flatten().cloned().fold(f64::MIN, f64::max);
        let mse: f64 = r.iter().flatten().zip(t.iter().flatten()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n;
        10.0 * (peak * peak / mse).log10()
    }

    /// Mean luminance and contrast-structure terms over all 7×7 windows.
    fn window_terms(r: &Img, t: &Img, range: f64) -> (f64, f64) {
        let win = 7;
        let c1 = (0.01 * range) * (0.01 * range);
        let c2 = (0.03 * range) * (0.03 * range);
        let (h, w) = (r.len(), r[0].len());
        let (mut lum_cs, mut cs_sum, mut count) = (0.0, 0.0, 0.0);
        for i in 0..=h - win {
            for j in 0..=w - win {
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for a in i..i + win {
                    for b in j..j + win {
                        xs.push(r[a][b]);
                        ys.push(t[a][b]);
                    }
                }
                let n = xs.len() as f64;
                let mx = xs.iter().sum::<f64>() / n;
                let my = ys.iter().sum::<f64>() / n;
                let vx = xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>() / (n - 1.0);
                let vy = ys.iter().map(|y| (y - my) * (y - my)).sum::<f64>() / (n - 1.0);
                let cxy = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1.0);
                let l = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
                let cs = (2.0 * cxy + c2) / (vx + vy + c2);
                lum_cs += l * cs;
                cs_sum += cs;
                count += 1.0;
            }
        }
        (lum_cs / count, cs_sum / count)
    }

    pub fn ssim(r: &Img, t: &Img, range: f64) -> f64 {
        window_terms(r, t, range).0
    }

    fn halve(img: &Img) -> Img {
        (0..img.len() / 2)
            .map(|i| {
                (0..img[0].len() / 2)
                    .map(|j| (img[2 * i][2 * j] + img[2 * i][2 * j + 1] + img[2 * i + 1][2 * j] + img[2 * i + 1][2 * j + 1]) / 4.0)
                    .collect()
            })
            .collect()
    }

    /// Standard five-scale weights truncated to `scales` and renormalized.
    pub fn msssim(r: &Img, t: &Img, range: f64, scales: usize) -> f64 {
        let all = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];
        let total: f64 = all[..scales].iter().sum();
        let (mut x, mut y) = (r.clone(), t.clone());
        let mut value = 1.0;
        for (s, weight) in all[..scales].iter().enumerate() {
            let (full, cs) = window_terms(&x, &y, range);
            let term = if s + 1 == scales { full } else { cs };
            value *= f64::max(term, 0.0).powf(weight / total);
            x = halve(&x);
            y = halve(&y);
        }
        value
    }
}

fn to_rows(img: &RealImage) -> oracle::Img {
    (0..img.height()).map(|r| (0..img.width()).map(|c| img.get(r, c)).collect()).collect()
}

#[test]
fn c06_metrics_match_scalar_oracles() {
    let _guard = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let (h, w) = if k % 2 == 0 { (32, 32) } else { (40, 28) };
        let t = if k < 10 {
            make_phantom(h.max(w), 1, 1, k).unwrap().slices[0].abs()
        } else {
            RealImage::from_fn(h.max(w), h.max(w), |_, _| rng.gen_range(0.0..1.0))
        };
        let t = RealImage::from_fn(h, w, |r, c| t.get(r, c));
        let sigma = rng.gen_range(0.01..0.3);
        let r = t.zip_with(&RealImage::from_fn(h, w, |_, _| rng.gen_range(-sigma..sigma)), |a, b| (a + b).abs()).unwrap();
        let range = t.max();
        let (ro, to) = (to_rows(&r), to_rows(&t));
        let ms = MsSsimParams::fitting((h, w), SsimParams::default()).unwrap();
        let pairs = [
            (nmse(&r, &t).unwrap(), oracle::nmse(&ro, &to)),
            (psnr(&r, &t).unwrap(), oracle::psnr(&ro, &to)),
            (ssim(&r, &t, &SsimParams::default(), range).unwrap(), oracle::ssim(&ro, &to, range)),
            (msssim(&r, &t, &ms, range).unwrap(), oracle::msssim(&ro, &to, range, ms.scales())),
        ];
        for (got, want) in pairs {
            worst = worst.max((got - want).abs());
        }
    }
    report(6, "metric oracles", worst < 1e-6, &format!("max deviation {worst:.2e} (< 1e-6) over 20 pairs"));
}

struct TrendRun {
    zero_filled: f64,
    ista: f64,
    network: f64,
    seconds: f64,
}

/// Trains the desk model on 20 volumes × 10 slices and scores 4 held-out volumes.
fn trend_run(layout: ChannelLayout) -> TrendRun {
    let start = Instant::now();
    let train_vols: Vec<VolumeData> = (0..20).map(|s| volume(32, 10, 4, s)).collect();
    let test_vols: Vec<VolumeData> = (100..104).map(|s| volume(32, 10, 4, s)).collect();
    let stacks: Vec<_> = train_vols.iter().flat_map(|v| v.stacks()).collect();
    let mut model = UnrolledModel::new(ArchitectureSpec::desk(layout), 7).unwrap();
    let cfg = TrainConfig { lr: 1e-4, epochs: 30, seed: 3, threads: 1, ..TrainConfig::default() };
    train(&mut model, &stacks, &cfg).unwrap();
    let params = SsimParams::default();
    let (mut zf, mut ista, mut net, mut n) = (0.0, 0.0, 0.0, 0.0);
    for vol in &test_vols {
        let range = vol.slices.iter().map(|s| s.target.as_ref().unwrap().max()).fold(0.0, f64::max);
        let recon = reconstruct_volume(&model, vol).unwrap();
        for (s, r) in vol.slices.iter().zip(&recon) {
            let t = s.target.as_ref().unwrap();
            let baseline = ista_solve(&s.kspace, &s.operator, &IstaConfig::default()).unwrap().image;
            zf += ssim(&s.zero_filled.abs(), t, &params, range).unwrap();
            ista += ssim(&baseline.abs(), t, &params, range).unwrap();
            net += ssim(&r.abs(), t, &params, range).unwrap();
            n += 1.0;
        }
    }
    TrendRun { zero_filled: zf / n, ista: ista / n, network: net / n, seconds: start.elapsed().as_secs_f64() }
}

fn two_point_five_d_run() -> &'static TrendRun {
    static RUN: OnceLock<TrendRun> = OnceLock::new();
    RUN.get_or_init(|| trend_run(ChannelLayout::two_point_five_d()))
}

#[test]
fn c07_training_beats_the_baselines() {
    let _guard = serial();
    let run = two_point_five_d_run();
    let pass = run.network - run.zero_filled >= 0.05 && run.network - run.ista >= 0.01 && run.seconds < 1800.0;
    report(
        7,
        "learning trend",
        pass,
        &format!(
            "held-out SSIM {:.4} vs zero-filled {:.4} (+{:.4}, >= 0.05) and ISTA-50 {:.4} (+{:.4}, >= 0.01), {:.0}s (< 1800s)",
            run.network,
            run.zero_filled,
            run.network - run.zero_filled,
            run.ista,
            run.network - run.ista,
            run.seconds
        ),
    );
}

#[test]
fn c08_neighbor_slices_do_not_hurt() {
    let _guard = serial();
    let with = two_point_five_d_run().network;
    let without = trend_run(ChannelLayout::two_d()).network;
    report(
        8,
        "2.5D vs 2D",
        with >= without - 0.005,
        &format!("held-out SSIM 2.5D {with:.4} vs 2D {without:.4} (2.5D >= 2D - 0.005)"),
    );
}

#[test]
fn c09_mask_statistics() {
    let _guard = serial();
    let width = 368;
    let mut details = Vec::new();
    let mut pass = true;
    for (accel, cf) in [(4.0, 0.08), (8.0, 0.04)] {
        let expected_center = (cf * width as f64).floor() as usize;
        let (mut kept, mut bad_centers) = (0usize, 0usize);
        for seed in 0..10_000 {
            let mask = make_cartesian_mask(width, accel, cf, seed).unwrap();
            let center = mask.nominal_center();
            if center.len() != expected_center || !center.clone().all(|c| mask.is_kept(c)) || !center.contains(&(width / 2)) {
                bad_centers += 1;
            }
            kept += mask.kept_count();
        }
        let fraction = kept as f64 / (10_000 * width) as f64;
        pass &= bad_centers == 0 && (fraction - 1.0 / accel).abs() <= 0.02;
        details.push(format!("{accel}x: kept {fraction:.4} vs {:.4}, {bad_centers} bad centers", 1.0 / accel));
    }
    report(9, "mask statistics", pass, &details.join("; "));
}

#[test]
fn c10_priors_vanish_on_matched_inputs() {
    let _guard = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_phase = 0.0f64;
    let mut worst_dc = 0.0f64;
    for seed in 0..5 {
        let vol = make_phantom(32, 1, 4, 700 + seed).unwrap();
        let x = &vol.slices[0];
        let acq = simulate_acquisition(&vol, 4.0, 0.08, 800 + seed).unwrap();
        let op = SenseOperator::for_kspace(&acq.kspace[0]).unwrap();
        let lpf = combined_lowpass(&acq.kspace[0], &op).unwrap();
        let gain = RealImage::from_fn(32, 32, |_, _| rng.gen_range(0.1..3.0));
        let matched = ComplexImage::from_fn(32, 32, |r, c| lpf.get(r, c) * gain.get(r, c));
        worst_phase = worst_phase.max(phase_prior(&matched, &lpf).unwrap().data().iter().fold(0.0, |m, v| m.max(v.abs())));

        let full = SenseOperator::new(&SamplingMask::full(32), Some(vol.maps.clone()), (32, 32)).unwrap();
        let y = MultiCoilKSpace::new(full.forward(x).unwrap(), SamplingMask::full(32)).unwrap();
        worst_dc = worst_dc.max(dc_prior(x, &y, &full).unwrap().max_abs());
    }
    report(
        10,
        "priors",
        worst_phase <= 1e-12 && worst_dc <= 1e-12,
        &format!("max |phase prior| {worst_phase:.2e}, max |dc prior| {worst_dc:.2e} (<= 1e-12)"),
    );
}

