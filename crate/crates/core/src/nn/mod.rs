//! Minimal neural-network core: NHWC tensors, the layers the denoiser needs,
//! losses, Adam, finite-difference gradient checking and checkpoints.
//!
//! Everything runs in `f64` on one thread with a fixed reduction order, so a
//! fixed seed and data order give bit-identical parameters.

mod adam;
pub mod checkpoint;
mod gradcheck;
mod layers;
mod loss;
mod sequential;
mod tensor;

pub use adam::{Adam, AdamConfig};
pub use gradcheck::{gradcheck, gradcheck_model, Evaluation, GradcheckOptions, GradcheckReport, Objective, SupervisedObjective};
pub use layers::{
    conv2d_backward, conv2d_forward, maxpool2x2_backward, maxpool2x2_forward, relu, sigmoid,
    upsample2x2_backward, upsample2x2_forward, Conv2d, ConvGrads, Layer, MaxPool2x2, Relu, Sigmoid,
    Upsample2x2,
};
pub use loss::{loss, loss_extended, LossKind, LossOutput, BCE_CLAMP};
pub use sequential::Sequential;
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("{0}: backward called before forward")]
    NoCachedForward(&'static str),
    #[error("max-pool needs even spatial dims, got {h}x{w}")]
    OddSpatialDim { h: usize, w: usize },
    #[error("non-finite value produced by layer {layer}")]
    NonFinite { layer: String },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
