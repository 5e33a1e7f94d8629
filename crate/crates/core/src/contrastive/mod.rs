//! SimCLR, NNCLR, BYOL and SimSiam objectives, the support queue, the
//! momentum target, and the pretraining loop.

mod ema;
mod loss;
mod model;
mod queue;
mod train;

pub use ema::{copy_state, ema_update};
pub use loss::{byol_simsiam_loss, cross_view_nce, info_nce, info_nce_one_sided, negative_cosine};
pub use model::{ContrastiveConfig, ContrastiveModel, Framework, TargetNetwork};
pub use queue::SupportQueue;
pub use train::{effective_batch, item_seed, pretrain, pretrain_epoch, EpochReport, PretrainConfig, Sampling};
