use std::sync::Arc;

use super::array::Array3;
use super::tape::LinearOp;
use crate::data::Acquisition;
use crate::error::{invalid, Result};
use crate::kspace::{MultiCoilKSpace, SenseOperator};
use crate::priors::LowpassReference;
use crate::tensor::{ComplexImage, RealImage};

/// `x ↦ Aᴴ M A x` on a two-channel (real, imaginary) image.
struct NormalOp(SenseOperator);

impl LinearOp for NormalOp {
    fn output_shape(&self, input: (usize, usize, usize)) -> (usize, usize, usize) {
        input
    }

    fn apply(&self, x: &Array3) -> Array3 {
        Array3::from_complex(&self.0.normal(&x.to_complex(0)).expect("operator shape checked at construction"))
    }

    fn adjoint(&self, g: &Array3) -> Array3 {
        self.apply(g)
    }
}

/// `x ↦ Im(x · w)`: two channels in, one out.
struct PhaseOp(ComplexImage);

impl LinearOp for PhaseOp {
    fn output_shape(&self, (_, h, w): (usize, usize, usize)) -> (usize, usize, usize) {
        (1, h, w)
    }

    fn apply(&self, x: &Array3) -> Array3 {
        let (re, im) = (x.channel(0), x.channel(1));
        let data = self.0.data().iter().enumerate().map(|(j, w)| re[j] * w.im + im[j] * w.re).collect();
        Array3 { c: 1, h: x.h, w: x.w, data }
    }

    fn adjoint(&self, g: &Array3) -> Array3 {
        let mut out = Array3::zeros(2, g.h, g.w);
        let p = g.plane();
        for (j, w) in self.0.data().iter().enumerate() {
            out.data[j] = g.data[j] * w.im;
            out.data[p + j] = g.data[j] * w.re;
        }
        out
    }
}

/// Pixelwise real scaling of a two-channel image.
struct ScaleOp(RealImage);

impl LinearOp for ScaleOp {
    fn output_shape(&self, input: (usize, usize, usize)) -> (usize, usize, usize) {
        input
    }

    fn apply(&self, x: &Array3) -> Array3 {
        let s = self.0.data();
        let p = x.plane();
        x.with_data(x.data.iter().enumerate().map(|(j, v)| v * s[j % p]).collect())
    }

    fn adjoint(&self, g: &Array3) -> Array3 {
        self.apply(g)
    }
}

/// Everything the network needs about one measured slice.
pub struct SliceData {
    pub kspace: MultiCoilKSpace,
    pub operator: SenseOperator,
    /// Zero-filled reconstruction `Aᴴ M y`.
    pub zero_filled: ComplexImage,
    pub reference: LowpassReference,
    pub target: Option<RealImage>,
    pub(crate) normal: Arc<dyn LinearOp>,
    pub(crate) phase: Arc<dyn LinearOp>,
    pub(crate) background: Arc<dyn LinearOp>,
}

/// Relative floor on `|x_lpf|` for the phase and background priors fed to the
/// network. [`crate::priors::LOWPASS_FLOOR`] lets the background prior amplify
/// changes in air by up to 1e6.
pub const NETWORK_LOWPASS_FLOOR: f64 = 5e-2;

impl SliceData {
    /// Sensitivities are estimated from the data when there are several coils.
    pub fn new(kspace: MultiCoilKSpace, target: Option<RealImage>) -> Result<Self> {
        let operator = SenseOperator::for_kspace(&kspace)?;
        Self::with_operator(kspace, operator, target)
    }

    pub fn with_operator(kspace: MultiCoilKSpace, operator: SenseOperator, target: Option<RealImage>) -> Result<Self> {
        if let Some(t) = &target {
            crate::error::ensure_shape(kspace.shape(), t.shape())?;
        }
        let zero_filled = operator.adjoint(kspace.planes())?;
        let reference = LowpassReference::from_kspace_with_floor(&kspace, &operator, NETWORK_LOWPASS_FLOOR)?;
        let normal: Arc<dyn LinearOp> = Arc::new(NormalOp(operator.clone()));
        let phase: Arc<dyn LinearOp> = Arc::new(PhaseOp(reference.phase_weight().clone()));
        let background: Arc<dyn LinearOp> = Arc::new(ScaleOp(reference.inv_modulus().clone()));
        Ok(Self { kspace, operator, zero_filled, reference, target, normal, phase, background })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.kspace.shape()
    }
}

impl std::fmt::Debug for SliceData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SliceData")
            .field("shape", &self.shape())
            .field("coils", &self.kspace.num_coils())
            .field("has_target", &self.target.is_some())
            .finish()
    }
}

/// Previous, center and next slice; volume edges repeat the edge slice.
#[derive(Clone, Debug)]
pub struct SliceStack {
    pub slices: [Arc<SliceData>; 3],
}

impl SliceStack {
    pub fn new(prev: Arc<SliceData>, center: Arc<SliceData>, next: Arc<SliceData>) -> Result<Self> {
        let shape = center.shape();
        if prev.shape() != shape || next.shape() != shape {
            return Err(invalid("slices of a stack must share one shape"));
        }
        Ok(Self { slices: [prev, center, next] })
    }

    /// A stack made of one slice repeated.
    pub fn single(slice: Arc<SliceData>) -> Self {
        Self { slices: [slice.clone(), slice.clone(), slice] }
    }

    pub fn center(&self) -> &SliceData {
        &self.slices[1]
    }

    pub fn shape(&self) -> (usize, usize) {
        self.center().shape()
    }
}

/// Prepared slices of one volume in acquisition order.
#[derive(Clone, Debug)]
pub struct VolumeData {
    pub slices: Vec<Arc<SliceData>>,
}

impl VolumeData {
    pub fn from_acquisition(acq: &Acquisition) -> Result<Self> {
        let slices = acq
            .kspace
            .iter()
            .zip(&acq.targets)
            .map(|(y, t)| SliceData::new(y.clone(), Some(t.clone())).map(Arc::new))
            .collect::<Result<_>>()?;
        Self::new(slices)
    }

    pub fn new(slices: Vec<Arc<SliceData>>) -> Result<Self> {
        if slices.is_empty() {
            return Err(invalid("a volume needs at least one slice"));
        }
        Ok(Self { slices })
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    /// Stack centered on slice `i` with replicated edges.
    pub fn stack(&self, i: usize) -> SliceStack {
        let last = self.slices.len() - 1;
        let at = |j: usize| self.slices[j.min(last)].clone();
        SliceStack { slices: [at(i.saturating_sub(1)), at(i), at(i + 1)] }
    }

    pub fn stacks(&self) -> Vec<SliceStack> {
        (0..self.len()).map(|i| self.stack(i)).collect()
    }
}
