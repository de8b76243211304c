//! Trainable unrolled reconstruction network.
//!
//! Each block maps the current estimate and its soft priors through a
//! learned multiscale encoder, soft-thresholds the features of every scale
//! with learned thresholds, decodes them back to image channels and adds
//! the result to the estimate. Gradients come from a small reverse-mode
//! [`Tape`].

mod array;
mod checkpoint;
mod context;
mod conv;
mod istanet;
mod loss;
mod model;
mod optim;
mod params;
mod tape;
mod train;

pub use array::Array3;
pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, AnyModel, Checkpoint, ModelDescriptor, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use context::{NETWORK_LOWPASS_FLOOR, SliceData, SliceStack, VolumeData};
pub use istanet::{istanet_plus_config, IstaNetConfig, IstaNetPlus};
pub use loss::{combined_loss_on_tape, l1_on_tape, msssim_on_tape};
pub use model::{
    reconstruct_volume, ArchitectureSpec, BlockConfig, ChannelLayout, ReconBlockParams, Reconstructor, TapeForward, ThresholdMode,
    UnrolledModel,
};
pub use optim::{radam_rho, radam_step, rmsprop_step, Optimizer, OptimizerConfig, RAdamState};
pub use params::{ConvSlot, ParamSet};
pub use tape::{LinearOp, ParamGrads, Tape, Var};
pub use train::{epoch_means, flatten_grads, sample_loss, train, train_from, TrainConfig, TrainProgress, TrainRecord};
