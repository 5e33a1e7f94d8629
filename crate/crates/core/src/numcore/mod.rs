//! Dense tensors with reverse-mode differentiation, network layer
//! primitives, the Adam optimizer, and checkpoint I/O.

mod adam;
pub mod checkpoint;
pub mod functional;
pub mod gradcheck;
mod layers;
mod ops;
mod scalar;
mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use functional::{cosine_sim, PoolIndices};
pub use layers::{
    BatchNorm1d, Conv1d, ConvTranspose1d, ForwardCtx, Init, LayerNorm, Linear, Lstm, Module, MultiHeadAttention,
    Parameter,
};
pub use scalar::{cast, gemm, Scalar};
pub use tensor::{grad_enabled, no_grad, BackwardCtx, Tensor};
