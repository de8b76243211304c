use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kspace::SensitivityMaps;
use crate::tensor::{Complex64, ComplexImage};

/// Modified Shepp-Logan ellipses: intensity, semi-axes, center, rotation in degrees.
const SHEPP_LOGAN: [[f64; 6]; 10] = [
    [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
    [-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0],
    [-0.2, 0.11, 0.31, 0.22, 0.0, -18.0],
    [-0.2, 0.16, 0.41, -0.22, 0.0, 18.0],
    [0.1, 0.21, 0.25, 0.0, 0.35, 0.0],
    [0.1, 0.046, 0.046, 0.0, 0.1, 0.0],
    [0.1, 0.046, 0.046, 0.0, -0.1, 0.0],
    [0.1, 0.046, 0.023, -0.08, -0.605, 0.0],
    [0.1, 0.023, 0.023, 0.0, -0.606, 0.0],
    [0.1, 0.023, 0.046, 0.06, -0.605, 0.0],
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhantomOptions {
    /// Fractional change of the inner ellipse axes from the middle of the volume to its ends.
    pub slice_drift: f64,
    /// Amplitude of the random per-volume perturbation of the ellipse layout.
    pub jitter: f64,
    /// Bound on the linear and quadratic phase coefficients (radians).
    pub phase_strength: f64,
    /// Width of the Gaussian coil profiles in normalized coordinates.
    pub coil_width: f64,
    /// Supersampling factor per axis when rasterizing ellipses.
    pub supersample: usize,
}

impl Default for PhantomOptions {
    fn default() -> Self {
        Self { slice_drift: 0.15, jitter: 0.05, phase_strength: 1.0, coil_width: 0.9, supersample: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhantomMeta {
    pub size: usize,
    pub num_slices: usize,
    pub num_coils: usize,
    pub seed: u64,
    /// `c0 + c1 x + c2 y + c3 x² + c4 xy + c5 y²` over `[-1, 1]²`.
    pub phase_coeffs: [f64; 6],
    pub options: PhantomOptions,
}

#[derive(Clone, Debug)]
pub struct PhantomVolume {
    pub slices: Vec<ComplexImage>,
    pub maps: SensitivityMaps,
    pub meta: PhantomMeta,
}

impl PhantomVolume {
    pub fn num_slices(&self) -> usize {
        self.slices.len()
    }
}

pub fn make_phantom(size: usize, num_slices: usize, num_coils: usize, seed: u64) -> Result<PhantomVolume> {
    make_phantom_with(size, num_slices, num_coils, seed, PhantomOptions::default())
}

pub fn make_phantom_with(
    size: usize,
    num_slices: usize,
    num_coils: usize,
    seed: u64,
    options: PhantomOptions,
) -> Result<PhantomVolume> {
    if size < 2 {
        return Err(invalid(format!("phantom size must be at least 2, got {size}")));
    }
    if num_slices == 0 || num_coils == 0 {
        return Err(invalid("phantom needs at least one slice and one coil"));
    }
    if options.supersample == 0 || !(options.coil_width > 0.0) {
        return Err(invalid("supersample and coil width must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = options.jitter;
    let scale = 1.0 - j * rng.gen_range(0.0..2.0);
    let rotation = rng.gen_range(-j..j) * 4.0;
    let ellipses: Vec<[f64; 6]> = SHEPP_LOGAN
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut e = *e;
            if i >= 2 {
                e[0] *= 1.0 + rng.gen_range(-3.0 * j..3.0 * j);
                e[3] += rng.gen_range(-j..j);
                e[4] += rng.gen_range(-j..j);
                e[1] *= 1.0 + rng.gen_range(-2.0 * j..2.0 * j);
                e[2] *= 1.0 + rng.gen_range(-2.0 * j..2.0 * j);
            }
            e
        })
        .collect();
    let p = options.phase_strength;
    let phase_coeffs = [
        rng.gen_range(-PI..PI),
        rng.gen_range(-p..p),
        rng.gen_range(-p..p),
        rng.gen_range(-p..p) * 0.5,
        rng.gen_range(-p..p) * 0.5,
        rng.gen_range(-p..p) * 0.5,
    ];
    let coil_offset = rng.gen_range(0.0..2.0 * PI);

    let slices = (0..num_slices)
        .map(|s| {
            let z = if num_slices > 1 { 2.0 * s as f64 / (num_slices - 1) as f64 - 1.0 } else { 0.0 };
            let shrink = 1.0 - options.slice_drift * z * z;
            let shift = 0.5 * options.slice_drift * z;
            let layout: Vec<[f64; 6]> = ellipses
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let mut e = *e;
                    let drift = if i >= 2 { shrink } else { 1.0 };
                    e[1] *= drift * scale;
                    e[2] *= drift * scale;
                    e[3] *= scale;
                    e[4] = e[4] * scale + if i >= 2 { shift } else { 0.0 };
                    e[5] += rotation;
                    e
                })
                .collect();
            let magnitude = rasterize(size, &layout, options.supersample);
            ComplexImage::from_fn(size, size, |r, c| {
                let (x, y) = normalized(size, r, c);
                let phi = phase_coeffs[0]
                    + phase_coeffs[1] * x
                    + phase_coeffs[2] * y
                    + phase_coeffs[3] * x * x
                    + phase_coeffs[4] * x * y
                    + phase_coeffs[5] * y * y;
                Complex64::from_polar(magnitude[r * size + c], phi)
            })
        })
        .collect();
    let maps = coil_maps(size, num_coils, coil_offset, options.coil_width)?;
    Ok(PhantomVolume {
        slices,
        maps,
        meta: PhantomMeta { size, num_slices, num_coils, seed, phase_coeffs, options },
    })
}

fn normalized(size: usize, r: usize, c: usize) -> (f64, f64) {
    let h = size as f64 / 2.0;
    ((c as f64 - h + 0.5) / h, (h - r as f64 - 0.5) / h)
}

fn rasterize(size: usize, ellipses: &[[f64; 6]], ss: usize) -> Vec<f64> {
    let h = size as f64 / 2.0;
    let inv = 1.0 / (ss * ss) as f64;
    let mut out = vec![0.0; size * size];
    for r in 0..size {
        for c in 0..size {
            let mut acc = 0.0;
            for sr in 0..ss {
                for sc in 0..ss {
                    let x = (c as f64 + (sc as f64 + 0.5) / ss as f64 - h) / h;
                    let y = (h - r as f64 - (sr as f64 + 0.5) / ss as f64) / h;
                    for e in ellipses {
                        let (sin, cos) = e[5].to_radians().sin_cos();
                        let (dx, dy) = (x - e[3], y - e[4]);
                        let u = (dx * cos + dy * sin) / e[1];
                        let v = (-dx * sin + dy * cos) / e[2];
                        if u * u + v * v <= 1.0 {
                            acc += e[0];
                        }
                    }
                }
            }
            out[r * size + c] = (acc * inv).max(0.0);
        }
    }
    out
}

/// Gaussian coil profiles around the field of view with a gentle linear
/// phase each, normalized so that `Σ_q |S_q|² = 1` at every pixel.
pub fn coil_maps(size: usize, num_coils: usize, offset: f64, width: f64) -> Result<SensitivityMaps> {
    if num_coils == 1 {
        return Ok(SensitivityMaps::unit(size, size));
    }
    let mut maps: Vec<ComplexImage> = (0..num_coils)
        .map(|q| {
            let angle = offset + 2.0 * PI * q as f64 / num_coils as f64;
            let (cy, cx) = (1.3 * angle.sin(), 1.3 * angle.cos());
            ComplexImage::from_fn(size, size, |r, c| {
                let (x, y) = normalized(size, r, c);
                let d2 = (x - cx).powi(2) + (y - cy).powi(2);
                Complex64::from_polar((-d2 / (2.0 * width * width)).exp(), 0.4 * (angle.cos() * x + angle.sin() * y))
            })
        })
        .collect();
    for i in 0..size * size {
        let energy: f64 = maps.iter().map(|m| m.data()[i].norm_sqr()).sum::<f64>().sqrt();
        for m in &mut maps {
            m.data_mut()[i] /= energy;
        }
    }
    SensitivityMaps::new(maps)
}
