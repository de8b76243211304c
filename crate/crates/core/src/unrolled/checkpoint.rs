use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::context::SliceStack;
use super::istanet::{IstaNetConfig, IstaNetPlus};
use super::model::{ArchitectureSpec, Reconstructor, TapeForward, UnrolledModel};
use super::params::ParamSet;
use super::tape::Tape;
use super::train::TrainProgress;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"ACSN";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Architecture needed to rebuild a model before loading its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelDescriptor {
    Adaptive { architecture: ArchitectureSpec },
    IstaNetPlus { config: IstaNetConfig },
}

#[derive(Serialize, Deserialize)]
struct Header {
    model: ModelDescriptor,
    progress: TrainProgress,
}

/// Either network family behind one type.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyModel {
    Adaptive(UnrolledModel),
    IstaNetPlus(IstaNetPlus),
}

impl AnyModel {
    pub fn from_descriptor(descriptor: &ModelDescriptor, seed: u64) -> Result<Self> {
        Ok(match descriptor {
            ModelDescriptor::Adaptive { architecture } => Self::Adaptive(UnrolledModel::new(architecture.clone(), seed)?),
            ModelDescriptor::IstaNetPlus { config } => Self::IstaNetPlus(IstaNetPlus::new(*config, seed)?),
        })
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        match self {
            Self::Adaptive(m) => ModelDescriptor::Adaptive { architecture: m.spec().clone() },
            Self::IstaNetPlus(m) => ModelDescriptor::IstaNetPlus { config: *m.config() },
        }
    }

    fn inner(&self) -> &dyn Reconstructor {
        match self {
            Self::Adaptive(m) => m,
            Self::IstaNetPlus(m) => m,
        }
    }
}

impl From<UnrolledModel> for AnyModel {
    fn from(m: UnrolledModel) -> Self {
        Self::Adaptive(m)
    }
}

impl From<IstaNetPlus> for AnyModel {
    fn from(m: IstaNetPlus) -> Self {
        Self::IstaNetPlus(m)
    }
}

impl Reconstructor for AnyModel {
    fn params(&self) -> &ParamSet {
        self.inner().params()
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        match self {
            Self::Adaptive(m) => m.params_mut(),
            Self::IstaNetPlus(m) => m.params_mut(),
        }
    }

    fn forward_on_tape(&self, tape: &mut Tape, stack: &SliceStack) -> Result<TapeForward> {
        self.inner().forward_on_tape(tape, stack)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: AnyModel,
    pub progress: TrainProgress,
}

/// Magic, `u32` version, `u64` length and JSON header, `u64` count and `f32` parameters, all little-endian.
pub fn write_checkpoint<W: Write>(model: &AnyModel, progress: TrainProgress, mut out: W) -> Result<()> {
    let header = serde_json::to_vec(&Header { model: model.descriptor(), progress })?;
    let params = model.params().flatten();
    let mut buf = Vec::with_capacity(24 + header.len() + 4 * params.len());
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(header.len() as u64).to_le_bytes());
    buf.extend_from_slice(&header);
    buf.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for p in params {
        buf.extend_from_slice(&(p as f32).to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(Error::Format("truncated checkpoint".into()));
    }
    let (head, rest) = bytes.split_at(n);
    *bytes = rest;
    Ok(head)
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<Checkpoint> {
    let mut all = Vec::new();
    input.read_to_end(&mut all)?;
    let mut bytes = all.as_slice();
    if take(&mut bytes, 4)? != CHECKPOINT_MAGIC {
        return Err(Error::Format("missing ACSN magic".into()));
    }
    let version = u32::from_le_bytes(take(&mut bytes, 4)?.try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let len = u64::from_le_bytes(take(&mut bytes, 8)?.try_into().unwrap());
    let len = usize::try_from(len).map_err(|_| Error::Format("header too large".into()))?;
    let header: Header = serde_json::from_slice(take(&mut bytes, len)?)?;
    let count = u64::from_le_bytes(take(&mut bytes, 8)?.try_into().unwrap());
    let mut model = AnyModel::from_descriptor(&header.model, 0)?;
    if count != model.params().count() as u64 || bytes.len() as u64 != count.saturating_mul(4) {
        return Err(Error::Format(format!(
            "{} parameter bytes for {} declared and {} expected parameters",
            bytes.len(),
            count,
            model.params().count()
        )));
    }
    let flat: Vec<f64> = bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect();
    model.params_mut().assign(&flat)?;
    Ok(Checkpoint { model, progress: header.progress })
}

pub fn save_checkpoint(path: impl AsRef<Path>, model: &AnyModel, progress: TrainProgress) -> Result<()> {
    let mut buf = Vec::new();
    write_checkpoint(model, progress, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    read_checkpoint(fs::read(path)?.as_slice())
}
