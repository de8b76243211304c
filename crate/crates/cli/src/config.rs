//! JSON run configuration. Every field is optional; a field that is present
//! replaces the matching command-line flag.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use csmri::unrolled::OptimizerConfig;
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ZeroFilled,
    Ista,
    Unrolled,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

impl Precision {
    pub fn single(self) -> bool {
        self == Self::F32
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Adaptive,
    Istanet,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
pub enum Layout {
    #[default]
    #[serde(rename = "2.5d")]
    #[value(name = "2.5d")]
    TwoPointFiveD,
    #[serde(rename = "2d")]
    #[value(name = "2d")]
    TwoD,
}

/// A single acceleration or a list of them.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Accelerations {
    One(f64),
    Many(Vec<f64>),
}

impl Accelerations {
    pub fn into_vec(self) -> Vec<f64> {
        match self {
            Self::One(a) => vec![a],
            Self::Many(v) => v,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub accel: Option<Accelerations>,
    pub center_frac: Option<f64>,
    pub seed: Option<u64>,
    pub method: Option<Method>,
    pub threads: Option<usize>,
    pub precision: Option<Precision>,
    pub coils: Option<usize>,
    pub volumes: Option<usize>,
    pub slices: Option<usize>,
    pub size: Option<usize>,
    pub iterations: Option<usize>,
    pub lambda: Option<f64>,
    pub model: Option<ModelKind>,
    pub layout: Option<Layout>,
    pub blocks: Option<usize>,
    pub scales: Option<usize>,
    pub features: Option<usize>,
    pub kernel: Option<usize>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub decay: Option<f64>,
    pub batch: Option<usize>,
    pub alpha: Option<f64>,
    pub optimizer: Option<OptimizerConfig>,
    pub neighbor_loss_weight: Option<f64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}
