//! Contrastive self-supervised learning for wearable-sensor time series.
//!
//! The crate is organised bottom-up:
//!
//! * [`numcore`]: tensors, reverse-mode differentiation, layers, Adam.
//! * [`data`]: recordings, sliding windows, normalization, splits, and a
//!   synthetic activity generator.
//! * [`augment`]: time- and frequency-domain augmentations.
//! * [`backbones`]: the six encoder families plus projector/predictor heads.
//! * [`contrastive`]: SimCLR, NNCLR, BYOL and SimSiam objectives and the
//!   pretraining loop.
//! * [`harness`]: linear probing, evaluation protocols, experiment configs
//!   and reports.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augment;
pub mod backbones;
pub mod contrastive;
pub mod data;
mod error;
pub mod harness;
pub mod numcore;

pub use error::{Error, Result};
pub use numcore::{Module, Parameter, Scalar, Tensor};
