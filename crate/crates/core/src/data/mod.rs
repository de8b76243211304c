//! Synthetic phantoms, acquisition simulation, tensor containers and image export.

mod acquisition;
mod container;
mod export;
mod phantom;

pub use acquisition::{simulate_acquisition, simulate_acquisition_with, Acquisition};
pub use container::{load_tensor, read_tensor, save_tensor, write_tensor, DType, Tensor, TensorData, CONTAINER_MAGIC, CONTAINER_VERSION};
pub use export::{export_image, to_gray8};
pub use phantom::{coil_maps, make_phantom, make_phantom_with, PhantomMeta, PhantomOptions, PhantomVolume};
