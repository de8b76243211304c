use std::ops::Range;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// How the non-center phase-encode lines are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Every outer line kept independently with a fixed probability.
    #[default]
    Bernoulli,
    /// Exactly `round(width / R) - center` outer lines, chosen uniformly.
    ExactCount,
}

/// Column (phase-encode) mask. Rows (readout) are always fully sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingMask {
    pub width: usize,
    pub acceleration: f64,
    pub center_fraction: f64,
    pub seed: u64,
    #[serde(with = "keep_bits")]
    pub keep: Vec<bool>,
}

mod keep_bits {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(keep: &[bool], s: S) -> Result<S::Ok, S::Error> {
        keep.iter().map(|&k| k as u8).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let bits = Vec::<u8>::deserialize(d)?;
        bits.into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(serde::de::Error::custom(format!("mask entry {other} is not 0 or 1"))),
            })
            .collect()
    }
}

/// Number of columns in the nominal fully sampled center block.
pub(crate) fn center_count(width: usize, center_fraction: f64) -> usize {
    (center_fraction * width as f64).floor() as usize
}

/// Nominal center block, placed so that it covers the DC column `width / 2`.
pub(crate) fn center_block(width: usize, center_fraction: f64) -> Range<usize> {
    let n = center_count(width, center_fraction);
    let start = (width - n + 1) / 2;
    start..start + n
}

pub fn make_cartesian_mask(width: usize, acceleration: f64, center_fraction: f64, seed: u64) -> Result<SamplingMask> {
    make_cartesian_mask_with(width, acceleration, center_fraction, seed, SamplingMode::Bernoulli)
}

pub fn make_cartesian_mask_with(
    width: usize,
    acceleration: f64,
    center_fraction: f64,
    seed: u64,
    mode: SamplingMode,
) -> Result<SamplingMask> {
    if width == 0 {
        return Err(invalid("mask width must be positive"));
    }
    if !(acceleration >= 1.0) || !acceleration.is_finite() {
        return Err(invalid(format!("acceleration must be >= 1, got {acceleration}")));
    }
    if !(center_fraction > 0.0 && center_fraction < 1.0) {
        return Err(invalid(format!("center fraction must lie in (0, 1), got {center_fraction}")));
    }
    let target_fraction = 1.0 / acceleration;
    if target_fraction < center_fraction {
        return Err(invalid(format!(
            "acceleration {acceleration} keeps fewer lines than the {center_fraction} center block"
        )));
    }

    let center = center_block(width, center_fraction);
    let mut keep = vec![false; width];
    keep[center.clone()].iter_mut().for_each(|k| *k = true);

    let outer: Vec<usize> = (0..width).filter(|c| !center.contains(c)).collect();
    let expected_outer = width as f64 * target_fraction - center.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if !outer.is_empty() {
        match mode {
            SamplingMode::Bernoulli => {
                let p = (expected_outer / outer.len() as f64).clamp(0.0, 1.0);
                for &c in &outer {
                    // Always draw so the stream position is independent of p.
                    let u: f64 = rng.gen();
                    keep[c] = u < p;
                }
            }
            SamplingMode::ExactCount => {
                let n = (expected_outer.round().max(0.0) as usize).min(outer.len());
                for i in index::sample(&mut rng, outer.len(), n) {
                    keep[outer[i]] = true;
                }
            }
        }
    }

    Ok(SamplingMask { width, acceleration, center_fraction, seed, keep })
}

impl SamplingMask {
    /// Mask that keeps every column.
    pub fn full(width: usize) -> Self {
        Self { width, acceleration: 1.0, center_fraction: 0.5, seed: 0, keep: vec![true; width] }
    }

    pub fn kept_count(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }

    pub fn kept_fraction(&self) -> f64 {
        self.kept_count() as f64 / self.width as f64
    }

    #[inline]
    pub fn is_kept(&self, col: usize) -> bool {
        self.keep[col]
    }

    /// Nominal center block implied by `center_fraction`.
    pub fn nominal_center(&self) -> Range<usize> {
        center_block(self.width, self.center_fraction)
    }

    /// The fully sampled region around DC: the maximal run of kept columns
    /// containing column `width / 2`. Empty when DC itself is dropped.
    pub fn fully_sampled_center(&self) -> Range<usize> {
        let dc = self.width / 2;
        if self.width == 0 || !self.keep[dc] {
            return dc..dc;
        }
        let mut lo = dc;
        while lo > 0 && self.keep[lo - 1] {
            lo -= 1;
        }
        let mut hi = dc + 1;
        while hi < self.width && self.keep[hi] {
            hi += 1;
        }
        lo..hi
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mask: Self = serde_json::from_str(text)?;
        if mask.keep.len() != mask.width {
            return Err(invalid(format!("mask has {} entries for width {}", mask.keep.len(), mask.width)));
        }
        Ok(mask)
    }
}
