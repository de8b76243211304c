use rand::Rng;

use super::array::Array3;
use crate::error::{invalid, Result};

/// Named trainable tensors in declaration order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamSet {
    tensors: Vec<Array3>,
    names: Vec<String>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a tensor and return its slot.
    pub fn push(&mut self, name: impl Into<String>, value: Array3) -> usize {
        self.tensors.push(value);
        self.names.push(name.into());
        self.tensors.len() - 1
    }

    pub fn slots(&self) -> usize {
        self.tensors.len()
    }

    /// Total number of scalars.
    pub fn count(&self) -> usize {
        self.tensors.iter().map(Array3::len).sum()
    }

    pub fn get(&self, slot: usize) -> &Array3 {
        &self.tensors[slot]
    }

    pub fn get_mut(&mut self, slot: usize) -> &mut Array3 {
        &mut self.tensors[slot]
    }

    pub fn name(&self, slot: usize) -> &str {
        &self.names[slot]
    }

    pub fn tensors(&self) -> &[Array3] {
        &self.tensors
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.tensors.iter().flat_map(|t| t.data.iter().copied()).collect()
    }

    /// Overwrite every scalar from a flat vector in declaration order.
    pub fn assign(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.count() {
            return Err(invalid(format!("{} values for {} parameters", flat.len(), self.count())));
        }
        let mut offset = 0;
        for t in &mut self.tensors {
            let n = t.len();
            t.data.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }
}

/// Slots of one convolution layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvSlot {
    pub weight: usize,
    pub bias: usize,
    pub kernel: usize,
}

impl ConvSlot {
    /// Weights and biases uniform in `±1/√fan_in`, or all zero.
    pub(crate) fn declare(
        params: &mut ParamSet,
        name: &str,
        cin: usize,
        cout: usize,
        kernel: usize,
        zero: bool,
        rng: &mut impl Rng,
    ) -> Self {
        let bound = 1.0 / ((cin * kernel * kernel) as f64).sqrt();
        let mut draw = |n: usize| -> Vec<f64> {
            if zero {
                vec![0.0; n]
            } else {
                (0..n).map(|_| rng.gen_range(-bound..bound)).collect()
            }
        };
        let w = draw(cout * cin * kernel * kernel);
        let b = draw(cout);
        let weight = params.push(format!("{name}.weight"), Array3 { c: cout, h: cin, w: kernel * kernel, data: w });
        let bias = params.push(format!("{name}.bias"), Array3 { c: cout, h: 1, w: 1, data: b });
        Self { weight, bias, kernel }
    }
}
