use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex32;

use crate::error::{Error, Result};
use crate::tensor::{Complex64, ComplexImage, RealImage};

pub const CONTAINER_MAGIC: &[u8; 4] = b"ACST";
pub const CONTAINER_VERSION: u8 = 1;
const HEADER_FIXED: usize = 4 + 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DType {
    F32 = 0,
    F64 = 1,
    Complex64 = 2,
    Complex128 = 3,
}

impl DType {
    fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => Self::F32,
            1 => Self::F64,
            2 => Self::Complex64,
            3 => Self::Complex128,
            other => return Err(Error::Format(format!("unknown dtype code {other}"))),
        })
    }

    pub fn element_size(self) -> usize {
        match self {
            Self::F32 => 4,
            Self::F64 | Self::Complex64 => 8,
            Self::Complex128 => 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TensorData {
    F32(Vec<f32>),
    F64(Vec<f64>),
    Complex64(Vec<Complex32>),
    Complex128(Vec<Complex64>),
}

impl TensorData {
    pub fn len(&self) -> usize {
        match self {
            Self::F32(v) => v.len(),
            Self::F64(v) => v.len(),
            Self::Complex64(v) => v.len(),
            Self::Complex128(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtype(&self) -> DType {
        match self {
            Self::F32(_) => DType::F32,
            Self::F64(_) => DType::F64,
            Self::Complex64(_) => DType::Complex64,
            Self::Complex128(_) => DType::Complex128,
        }
    }
}

/// Dense row-major N-dimensional array.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: TensorData,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: TensorData) -> Result<Self> {
        if dims.len() > u8::MAX as usize {
            return Err(Error::Format(format!("{} dimensions exceed the container limit", dims.len())));
        }
        let count: usize = dims.iter().product();
        if count != data.len() {
            return Err(Error::InvalidArgument(format!("dims {dims:?} hold {count} elements, data has {}", data.len())));
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &TensorData {
        &self.data
    }

    pub fn dtype(&self) -> DType {
        self.data.dtype()
    }

    /// Stack equally shaped complex images along a leading axis.
    pub fn from_complex_images(images: &[ComplexImage]) -> Result<Self> {
        let (h, w) = images.first().map_or((0, 0), ComplexImage::shape);
        let mut data = Vec::with_capacity(images.len() * h * w);
        for img in images {
            crate::error::ensure_shape((h, w), img.shape())?;
            data.extend_from_slice(img.data());
        }
        Self::new(vec![images.len(), h, w], TensorData::Complex128(data))
    }

    pub fn from_real_images(images: &[RealImage]) -> Result<Self> {
        let (h, w) = images.first().map_or((0, 0), RealImage::shape);
        let mut data = Vec::with_capacity(images.len() * h * w);
        for img in images {
            crate::error::ensure_shape((h, w), img.shape())?;
            data.extend_from_slice(img.data());
        }
        Self::new(vec![images.len(), h, w], TensorData::F64(data))
    }

    /// Same values stored at 32-bit precision.
    pub fn to_single(&self) -> Self {
        let data = match &self.data {
            TensorData::F64(v) => TensorData::F32(v.iter().map(|&x| x as f32).collect()),
            TensorData::Complex128(v) => TensorData::Complex64(v.iter().map(|c| Complex32::new(c.re as f32, c.im as f32)).collect()),
            other => other.clone(),
        };
        Self { dims: self.dims.clone(), data }
    }

    fn complex_values(&self) -> Vec<Complex64> {
        match &self.data {
            TensorData::F32(v) => v.iter().map(|&x| Complex64::new(x as f64, 0.0)).collect(),
            TensorData::F64(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            TensorData::Complex64(v) => v.iter().map(|c| Complex64::new(c.re as f64, c.im as f64)).collect(),
            TensorData::Complex128(v) => v.clone(),
        }
    }

    fn split_trailing(&self) -> Result<(usize, usize, usize)> {
        if self.dims.len() < 2 {
            return Err(Error::Format(format!("need at least 2 dims for images, got {:?}", self.dims)));
        }
        let n = self.dims.len();
        let (h, w) = (self.dims[n - 2], self.dims[n - 1]);
        Ok((self.dims[..n - 2].iter().product(), h, w))
    }

    /// Split the trailing two axes into images, in row-major order of the leading axes.
    pub fn to_complex_images(&self) -> Result<Vec<ComplexImage>> {
        let (count, h, w) = self.split_trailing()?;
        let values = self.complex_values();
        (0..count).map(|i| ComplexImage::new(h, w, values[i * h * w..(i + 1) * h * w].to_vec())).collect()
    }

    /// Real images; complex payloads are rejected.
    pub fn to_real_images(&self) -> Result<Vec<RealImage>> {
        let (count, h, w) = self.split_trailing()?;
        let values: Vec<f64> = match &self.data {
            TensorData::F32(v) => v.iter().map(|&x| x as f64).collect(),
            TensorData::F64(v) => v.clone(),
            _ => return Err(Error::Format("expected a real tensor".into())),
        };
        (0..count).map(|i| RealImage::new(h, w, values[i * h * w..(i + 1) * h * w].to_vec())).collect()
    }
}

pub fn write_tensor<W: Write>(tensor: &Tensor, mut out: W) -> Result<()> {
    let mut buf = Vec::with_capacity(HEADER_FIXED + 8 * tensor.dims.len() + tensor.data.len() * tensor.dtype().element_size());
    buf.extend_from_slice(CONTAINER_MAGIC);
    buf.push(CONTAINER_VERSION);
    buf.push(tensor.dtype() as u8);
    buf.push(tensor.dims.len() as u8);
    for &d in &tensor.dims {
        buf.extend_from_slice(&(d as u64).to_le_bytes());
    }
    match &tensor.data {
        TensorData::F32(v) => v.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes())),
        TensorData::F64(v) => v.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes())),
        TensorData::Complex64(v) => v.iter().for_each(|c| {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }),
        TensorData::Complex128(v) => v.iter().for_each(|c| {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }),
    }
    out.write_all(&buf)?;
    Ok(())
}

/// Parse a whole container. Short or over-long input is a format error.
pub fn read_tensor<R: Read>(mut input: R) -> Result<Tensor> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    decode(&bytes)
}

fn decode(bytes: &[u8]) -> Result<Tensor> {
    if bytes.len() < HEADER_FIXED || &bytes[..4] != CONTAINER_MAGIC {
        return Err(Error::Format("missing ACST magic".into()));
    }
    if bytes[4] != CONTAINER_VERSION {
        return Err(Error::Format(format!("unsupported container version {}", bytes[4])));
    }
    let dtype = DType::from_code(bytes[5])?;
    let ndim = bytes[6] as usize;
    let dims_end = HEADER_FIXED + 8 * ndim;
    if bytes.len() < dims_end {
        return Err(Error::Format("truncated header".into()));
    }
    let dims: Vec<usize> = bytes[HEADER_FIXED..dims_end]
        .chunks_exact(8)
        .map(|c| usize::try_from(u64::from_le_bytes(c.try_into().unwrap())))
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Format("dimension does not fit in memory".into()))?;
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format("dimension product overflows".into()))?;
    let payload = &bytes[dims_end..];
    let expected = count.checked_mul(dtype.element_size()).ok_or_else(|| Error::Format("payload size overflows".into()))?;
    if payload.len() != expected {
        return Err(Error::Format(format!("payload has {} bytes, expected {expected}", payload.len())));
    }
    let data = match dtype {
        DType::F32 => TensorData::F32(payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect()),
        DType::F64 => TensorData::F64(payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()),
        DType::Complex64 => TensorData::Complex64(
            payload
                .chunks_exact(8)
                .map(|c| Complex32::new(f32::from_le_bytes(c[..4].try_into().unwrap()), f32::from_le_bytes(c[4..].try_into().unwrap())))
                .collect(),
        ),
        DType::Complex128 => TensorData::Complex128(
            payload
                .chunks_exact(16)
                .map(|c| Complex64::new(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap())))
                .collect(),
        ),
    };
    Tensor::new(dims, data)
}

pub fn save_tensor(path: impl AsRef<Path>, tensor: &Tensor) -> Result<()> {
    let mut buf = Vec::new();
    write_tensor(tensor, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    decode(&fs::read(path)?)
}
