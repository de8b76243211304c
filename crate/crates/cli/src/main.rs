//! `csmri` command-line front end.

mod config;
mod dataset;

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use csmri::data::{export_image, make_phantom, simulate_acquisition};
use csmri::metrics::{aggregate_reports, evaluate_volume, write_metrics_csv, write_metrics_json, MetricsReport};
use csmri::sparsity::{ista_solve, IstaConfig, Lambda, DEFAULT_RELATIVE_LAMBDA};
use csmri::tensor::ComplexImage;
use csmri::unrolled::{
    load_checkpoint, save_checkpoint, train_from, AnyModel, ArchitectureSpec, BlockConfig, ChannelLayout, IstaNetConfig,
    ModelDescriptor, Reconstructor, TrainConfig, TrainProgress, TrainRecord, VolumeData,
};
use rayon::prelude::*;

use config::{Layout, Method, ModelKind, Precision, RunConfig};
use dataset::{accel_dir, load_volume, read_magnitudes, read_targets, recon_path, volume_name, write_acquisition, write_recon, write_targets, Manifest};

#[derive(Parser, Debug)]
#[command(name = "csmri", version, about = "Compressed-sensing MRI simulation, reconstruction, training and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate phantom volumes and their undersampled acquisitions.
    Simulate(SimulateArgs),
    /// Reconstruct every volume of a dataset and score it.
    Recon(ReconArgs),
    /// Train a network on a dataset and write a checkpoint.
    Train(TrainArgs),
    /// Score reconstructions against the dataset targets.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON file whose fields replace the matching flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Storage precision of written tensors.
    #[arg(long, value_enum)]
    precision: Option<Precision>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: PathBuf,
    /// Acceleration factors, comma separated.
    #[arg(long, value_delimiter = ',')]
    accel: Vec<f64>,
    #[arg(long)]
    center_frac: Option<f64>,
    #[arg(long)]
    coils: Option<usize>,
    #[arg(long)]
    volumes: Option<usize>,
    #[arg(long)]
    slices: Option<usize>,
    /// Image height and width.
    #[arg(long)]
    size: Option<usize>,
}

#[derive(Args, Debug)]
struct ReconArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    accel: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Trained network for `--method unrolled`.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// ISTA iterations.
    #[arg(long)]
    iterations: Option<usize>,
    /// ISTA threshold weight relative to the largest zero-filled magnitude.
    #[arg(long)]
    lambda: Option<f64>,
    /// Also export every slice magnitude as PNG.
    #[arg(long)]
    png: bool,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data: PathBuf,
    /// Checkpoint to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    accel: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[arg(long, value_enum)]
    layout: Option<Layout>,
    #[arg(long)]
    blocks: Option<usize>,
    /// Resume from this checkpoint instead of a fresh initialization.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Loss history CSV; defaults to the checkpoint path with a `.history.csv` suffix.
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: PathBuf,
    /// Output tree of `csmri recon`.
    #[arg(long)]
    recon: PathBuf,
    /// Accelerations to score; all of the dataset's by default.
    #[arg(long, value_delimiter = ',')]
    accel: Vec<f64>,
    /// Metrics CSV to write; one row per volume and acceleration.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Recon(a) => recon(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    ensure!(threads >= 1, "--threads must be at least 1");
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let accels = cfg.accel.map(|a| a.into_vec()).unwrap_or(if args.accel.is_empty() { vec![4.0] } else { args.accel });
    let center_fraction = cfg.center_frac.or(args.center_frac).unwrap_or(0.08);
    let seed = cfg.seed.or(args.common.seed).unwrap_or(0);
    let coils = cfg.coils.or(args.coils).unwrap_or(4);
    let volumes = cfg.volumes.or(args.volumes).unwrap_or(4);
    let slices = cfg.slices.or(args.slices).unwrap_or(10);
    let size = cfg.size.or(args.size).unwrap_or(32);
    let single = cfg.precision.or(args.common.precision).unwrap_or_default().single();
    ensure!(!accels.is_empty(), "at least one acceleration is required");
    for &a in &accels {
        ensure!(a >= 1.0 && a.is_finite(), "acceleration must be at least 1, got {a}");
    }
    ensure!(volumes >= 1 && slices >= 1 && coils >= 1, "volumes, slices and coils must be at least 1");

    let out = &args.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let names: Vec<String> = (0..volumes).map(volume_name).collect();
    for (i, name) in names.iter().enumerate() {
        let phantom = make_phantom(size, slices, coils, seed.wrapping_add(i as u64))?;
        let vdir = out.join(name);
        let mut targets = None;
        for (k, &accel) in accels.iter().enumerate() {
            let mask_seed = seed.wrapping_add(1_000_000 * (k as u64 + 1) + i as u64);
            let acq = simulate_acquisition(&phantom, accel, center_fraction, mask_seed)?;
            write_acquisition(&vdir.join(accel_dir(accel)), &acq, single)?;
            targets.get_or_insert(acq.targets);
        }
        write_targets(&vdir, &targets.expect("at least one acceleration"), &phantom.meta, single)?;
    }
    Manifest { size, slices, coils, center_fraction, accelerations: accels, seed, volumes: names }.save(out)?;
    println!("wrote {volumes} volumes to {}", out.display());
    Ok(())
}

fn load_model(path: &Path) -> Result<AnyModel> {
    Ok(load_checkpoint(path).with_context(|| format!("loading checkpoint {}", path.display()))?.model)
}

fn reconstruct(
    volume: &VolumeData,
    method: Method,
    model: Option<&AnyModel>,
    ista: &IstaConfig,
    pool: &rayon::ThreadPool,
) -> Result<Vec<ComplexImage>> {
    pool.install(|| {
        (0..volume.len())
            .into_par_iter()
            .map(|i| {
                let slice = &volume.slices[i];
                Ok(match method {
                    Method::ZeroFilled => slice.zero_filled.clone(),
                    Method::Ista => ista_solve(&slice.kspace, &slice.operator, ista)?.image,
                    Method::Unrolled => model.expect("checked").reconstruct(&volume.stack(i))?,
                })
            })
            .collect()
    })
}

fn recon(args: ReconArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let accel = match cfg.accel {
        Some(a) => match a.into_vec().as_slice() {
            [one] => *one,
            other => bail!("recon takes one acceleration, config lists {other:?}"),
        },
        None => args.accel.unwrap_or(4.0),
    };
    let method = cfg.method.or(args.method).unwrap_or(Method::ZeroFilled);
    let single = cfg.precision.or(args.common.precision).unwrap_or_default().single();
    let pool = thread_pool(cfg.threads.or(args.common.threads).unwrap_or(1))?;
    let ista = IstaConfig {
        iters: cfg.iterations.or(args.iterations).unwrap_or(50),
        lambda: Lambda::Relative(cfg.lambda.or(args.lambda).unwrap_or(DEFAULT_RELATIVE_LAMBDA)),
        ..IstaConfig::default()
    };
    let model = match (method, &args.checkpoint) {
        (Method::Unrolled, Some(path)) => Some(load_model(path)?),
        (Method::Unrolled, None) => bail!("--method unrolled needs --checkpoint"),
        (_, Some(_)) => bail!("--checkpoint only applies to --method unrolled"),
        (_, None) => None,
    };

    let manifest = Manifest::load(&args.data)?;
    manifest.check_acceleration(accel)?;
    let mut reports = Vec::new();
    let mut volumes = Vec::new();
    for name in &manifest.volumes {
        let volume = load_volume(&args.data, name, accel)?;
        let images = reconstruct(&volume, method, model.as_ref(), &ista, &pool)?;
        write_recon(&recon_path(&args.out, name, accel), &images, single)?;
        let mags: Vec<_> = images.iter().map(ComplexImage::abs).collect();
        if args.png {
            let dir = args.out.join(accel_dir(accel)).join("png");
            fs::create_dir_all(&dir)?;
            for (s, m) in mags.iter().enumerate() {
                export_image(m, dir.join(format!("{name}_s{s:02}.png")), None)?;
            }
        }
        let targets: Vec<_> = volume.slices.iter().map(|s| s.target.clone().expect("loaded with targets")).collect();
        let (slices, aggregate) = evaluate_volume(&mags, &targets, name, accel)?;
        reports.extend(slices);
        volumes.push(aggregate);
    }
    reports.extend(volumes.iter().cloned());
    let dir = args.out.join(accel_dir(accel));
    write_metrics_csv(&reports, BufWriter::new(File::create(dir.join("metrics.csv"))?))?;
    write_metrics_json(&reports, BufWriter::new(File::create(dir.join("metrics.json"))?))?;
    let overall = aggregate_reports(&volumes, "all", accel);
    println!(
        "{accel}x {}: NMSE {:.5}  PSNR {:.3} dB  SSIM {:.4}  MS-SSIM {:.4}",
        method.to_possible_value().expect("no skipped variants").get_name(),
        overall.nmse, overall.psnr, overall.ssim, overall.msssim
    );
    Ok(())
}

fn architecture(cfg: &RunConfig, args: &TrainArgs) -> ModelDescriptor {
    let blocks = cfg.blocks.or(args.blocks);
    match cfg.model.or(args.model).unwrap_or_default() {
        ModelKind::Istanet => {
            let d = IstaNetConfig::default();
            ModelDescriptor::IstaNetPlus {
                config: IstaNetConfig {
                    blocks: blocks.unwrap_or(d.blocks),
                    features: cfg.features.unwrap_or(d.features),
                    kernel: cfg.kernel.unwrap_or(d.kernel),
                    ..d
                },
            }
        }
        ModelKind::Adaptive => {
            let layout = match cfg.layout.or(args.layout).unwrap_or_default() {
                Layout::TwoPointFiveD => ChannelLayout::two_point_five_d(),
                Layout::TwoD => ChannelLayout::two_d(),
            };
            let architecture = if blocks.is_none() && cfg.scales.is_none() && cfg.features.is_none() && cfg.kernel.is_none() {
                ArchitectureSpec::desk(layout)
            } else {
                let block = BlockConfig {
                    scales: cfg.scales.unwrap_or(3),
                    kernel: cfg.kernel.unwrap_or(3),
                    features: cfg.features.unwrap_or(8),
                };
                ArchitectureSpec::alternating(blocks.unwrap_or(5), &[block], layout)
            };
            ModelDescriptor::Adaptive { architecture }
        }
    }
}

fn write_history(path: &Path, history: &[TrainRecord]) -> Result<()> {
    let mut text = String::from("epoch,step,lr,loss\n");
    for r in history {
        writeln!(text, "{},{},{},{}", r.epoch, r.step, r.lr, r.loss)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn train(args: TrainArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let accel = match cfg.accel.clone() {
        Some(a) => match a.into_vec().as_slice() {
            [one] => *one,
            other => bail!("train takes one acceleration, config lists {other:?}"),
        },
        None => args.accel.unwrap_or(4.0),
    };
    let seed = cfg.seed.or(args.common.seed).unwrap_or(0);
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        lr: cfg.lr.or(args.lr).unwrap_or(defaults.lr),
        decay: cfg.decay.unwrap_or(defaults.decay),
        epochs: cfg.epochs.or(args.epochs).unwrap_or(defaults.epochs),
        batch: cfg.batch.unwrap_or(defaults.batch),
        seed,
        alpha: cfg.alpha.unwrap_or(defaults.alpha),
        optimizer: cfg.optimizer.unwrap_or(defaults.optimizer),
        neighbor_loss_weight: cfg.neighbor_loss_weight.unwrap_or(defaults.neighbor_loss_weight),
        threads: cfg.threads.or(args.common.threads).unwrap_or(1),
    };
    ensure!(config.threads >= 1, "--threads must be at least 1");

    if args.checkpoint.is_some() && (args.model.is_some() || args.layout.is_some() || args.blocks.is_some()) {
        bail!("architecture flags conflict with --checkpoint; the checkpoint fixes the architecture");
    }
    let (mut model, start) = match &args.checkpoint {
        Some(path) => {
            let ckpt = load_checkpoint(path).with_context(|| format!("loading checkpoint {}", path.display()))?;
            (ckpt.model, ckpt.progress)
        }
        None => (AnyModel::from_descriptor(&architecture(&cfg, &args), seed)?, TrainProgress::default()),
    };

    let manifest = Manifest::load(&args.data)?;
    manifest.check_acceleration(accel)?;
    let mut stacks = Vec::new();
    for name in &manifest.volumes {
        stacks.extend(load_volume(&args.data, name, accel)?.stacks());
    }
    let (history, progress) = match &mut model {
        AnyModel::Adaptive(m) => train_from(m, &stacks, &config, start)?,
        AnyModel::IstaNetPlus(m) => train_from(m, &stacks, &config, start)?,
    };
    save_checkpoint(&args.out, &model, progress).with_context(|| format!("writing {}", args.out.display()))?;
    let history_path = args.history.unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".history.csv");
        PathBuf::from(p)
    });
    write_history(&history_path, &history)?;
    if let Some(last) = history.last() {
        println!("epoch {} step {}: loss {:.5}", last.epoch, last.step, last.loss);
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let manifest = Manifest::load(&args.data)?;
    let accels = match cfg.accel {
        Some(a) => a.into_vec(),
        None if args.accel.is_empty() => manifest.accelerations.clone(),
        None => args.accel,
    };
    let mut rows = Vec::new();
    let mut table = String::new();
    writeln!(table, "{:>8} {:>10} {:>10} {:>8} {:>8}", "accel", "NMSE", "PSNR", "SSIM", "MS-SSIM")?;
    for &accel in &accels {
        manifest.check_acceleration(accel)?;
        let mut per_volume: Vec<MetricsReport> = Vec::new();
        for name in &manifest.volumes {
            let targets = read_targets(&args.data.join(name))?;
            let recons = read_magnitudes(&recon_path(&args.recon, name, accel))?;
            let (_, aggregate) = evaluate_volume(&recons, &targets, name, accel)?;
            per_volume.push(aggregate);
        }
        let overall = aggregate_reports(&per_volume, "all", accel);
        writeln!(
            table,
            "{:>8} {:>10.6} {:>10.4} {:>8.4} {:>8.4}",
            format!("{accel}x"),
            overall.nmse,
            overall.psnr,
            overall.ssim,
            overall.msssim
        )?;
        rows.extend(per_volume);
    }
    if let Some(out) = &args.out {
        let mut w = BufWriter::new(File::create(out).with_context(|| format!("creating {}", out.display()))?);
        write_metrics_csv(&rows, &mut w)?;
        w.flush()?;
    }
    print!("{table}");
    Ok(())
}
