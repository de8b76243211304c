//! On-disk layout shared by the subcommands.
//!
//! ```text
//! DIR/dataset.json              manifest
//! DIR/vol000/target.acst        real [slices, h, w], root-sum-of-squares ground truth
//! DIR/vol000/phantom.json       phantom parameters
//! DIR/vol000/x4/kspace.acst     complex [slices, coils, h, w], zeros where unsampled
//! DIR/vol000/x4/mask.json       sampling mask
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use csmri::data::{load_tensor, save_tensor, Acquisition, PhantomMeta, Tensor, TensorData};
use csmri::kspace::{MultiCoilKSpace, SamplingMask};
use csmri::tensor::{ComplexImage, RealImage};
use csmri::unrolled::{SliceData, VolumeData};
use serde::{Deserialize, Serialize};

pub const MANIFEST: &str = "dataset.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub size: usize,
    pub slices: usize,
    pub coils: usize,
    pub center_fraction: f64,
    pub accelerations: Vec<f64>,
    pub seed: u64,
    pub volumes: Vec<String>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn check_acceleration(&self, acceleration: f64) -> Result<()> {
        ensure!(
            self.accelerations.contains(&acceleration),
            "dataset has no {acceleration}x acquisition (available: {:?})",
            self.accelerations
        );
        Ok(())
    }
}

pub fn volume_name(i: usize) -> String {
    format!("vol{i:03}")
}

pub fn accel_dir(acceleration: f64) -> String {
    format!("x{acceleration}")
}

/// Tensor with a new shape over the same elements.
fn reshape(t: Tensor, dims: Vec<usize>) -> Result<Tensor> {
    let data = t.data().clone();
    Ok(Tensor::new(dims, data)?)
}

fn store(tensor: Tensor, path: &Path, single: bool) -> Result<()> {
    let tensor = if single { tensor.to_single() } else { tensor };
    save_tensor(path, &tensor).with_context(|| format!("writing {}", path.display()))
}

pub fn write_targets(dir: &Path, targets: &[RealImage], meta: &PhantomMeta, single: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    store(Tensor::from_real_images(targets)?, &dir.join("target.acst"), single)?;
    fs::write(dir.join("phantom.json"), serde_json::to_string_pretty(meta)? + "\n")?;
    Ok(())
}

pub fn write_acquisition(dir: &Path, acq: &Acquisition, single: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    let planes: Vec<ComplexImage> = acq.kspace.iter().flat_map(|k| k.planes().iter().cloned()).collect();
    let (h, w) = acq.kspace[0].shape();
    let coils = acq.kspace[0].num_coils();
    let tensor = reshape(Tensor::from_complex_images(&planes)?, vec![acq.num_slices(), coils, h, w])?;
    store(tensor, &dir.join("kspace.acst"), single)?;
    fs::write(dir.join("mask.json"), acq.mask.to_json()? + "\n")?;
    Ok(())
}

pub fn read_targets(dir: &Path) -> Result<Vec<RealImage>> {
    let path = dir.join("target.acst");
    let t = load_tensor(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(t.to_real_images()?)
}

pub fn read_kspace(dir: &Path) -> Result<Vec<MultiCoilKSpace>> {
    let mask_path = dir.join("mask.json");
    let text = fs::read_to_string(&mask_path).with_context(|| format!("reading {}", mask_path.display()))?;
    let mask = SamplingMask::from_json(&text)?;
    let path = dir.join("kspace.acst");
    let t = load_tensor(&path).with_context(|| format!("reading {}", path.display()))?;
    let dims = t.dims().to_vec();
    ensure!(dims.len() == 4, "{}: expected [slices, coils, h, w], got {dims:?}", path.display());
    let planes = t.to_complex_images()?;
    planes
        .chunks(dims[1])
        .map(|c| Ok(MultiCoilKSpace::new(c.to_vec(), mask.clone())?))
        .collect()
}

/// Reconstruction inputs of one volume at one acceleration.
pub fn load_volume(data: &Path, volume: &str, acceleration: f64) -> Result<VolumeData> {
    let vdir = data.join(volume);
    let targets = read_targets(&vdir)?;
    let kspace = read_kspace(&vdir.join(accel_dir(acceleration)))?;
    ensure!(kspace.len() == targets.len(), "{volume}: {} k-space slices for {} targets", kspace.len(), targets.len());
    let slices = kspace
        .into_iter()
        .zip(targets)
        .map(|(k, t)| Ok(Arc::new(SliceData::new(k, Some(t))?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(VolumeData::new(slices)?)
}

/// Per-volume reconstruction file inside a recon output tree.
pub fn recon_path(root: &Path, volume: &str, acceleration: f64) -> PathBuf {
    root.join(accel_dir(acceleration)).join(format!("{volume}.acst"))
}

/// Magnitudes stored in a reconstruction file, complex or real.
pub fn read_magnitudes(path: &Path) -> Result<Vec<RealImage>> {
    let t = load_tensor(path).with_context(|| format!("reading {}", path.display()))?;
    match t.data() {
        TensorData::Complex64(_) | TensorData::Complex128(_) => Ok(t.to_complex_images()?.iter().map(ComplexImage::abs).collect()),
        TensorData::F64(_) | TensorData::F32(_) => Ok(t.to_real_images()?),
    }
}

pub fn write_recon(path: &Path, images: &[ComplexImage], single: bool) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    if images.is_empty() {
        bail!("nothing to write to {}", path.display());
    }
    store(Tensor::from_complex_images(images)?, path, single)
}
