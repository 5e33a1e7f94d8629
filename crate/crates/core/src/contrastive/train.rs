use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::ContrastiveModel;
use crate::augment::{make_views, AugKind, AugmentationSpec, PairMode};
use crate::backbones::batch_tensor;
use crate::data::{balanced_sample_probs, Sampler, TimeSeriesWindow};
use crate::error::{Error, Result};
use crate::numcore::{AdamConfig, AdamState, ForwardCtx, Scalar};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Seeded shuffle without replacement; needs no labels.
    #[default]
    Uniform,
    /// Inverse class frequency with replacement; needs labels.
    Balanced,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PretrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub aug1: AugmentationSpec,
    pub aug2: AugmentationSpec,
    pub pair_mode: PairMode,
    pub sampling: Sampling,
    pub seed: u64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig {
            epochs: 120,
            batch_size: 256,
            lr: 3e-3,
            weight_decay: 1e-6,
            aug1: AugmentationSpec::new(AugKind::Noise, 0),
            aug2: AugmentationSpec::new(AugKind::Scale, 0),
            pair_mode: PairMode::TwoAugs,
            sampling: Sampling::Uniform,
            seed: 0,
        }
    }
}

impl PretrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig { lr: self.lr, weight_decay: self.weight_decay, ..AdamConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub mean_loss: f64,
    /// Batches that produced a loss (an NNCLR priming batch does not).
    pub batches: usize,
    pub lr: f64,
    pub wall_ms: u64,
}

/// Stateless 64-bit mix of `(seed, epoch, index)` used for per-item
/// augmentation streams.
pub fn item_seed(seed: u64, epoch: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(seed) ^ epoch) ^ index)
}

const SALT_ORDER: u64 = u64::MAX;
const SALT_DROPOUT: u64 = u64::MAX - 1;

/// Visiting order of one epoch.
fn epoch_order(windows: &[TimeSeriesWindow], indices: &[usize], cfg: &PretrainConfig, epoch: u64) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(item_seed(cfg.seed, epoch, SALT_ORDER));
    match cfg.sampling {
        Sampling::Uniform => {
            let mut order = indices.to_vec();
            order.shuffle(&mut rng);
            Ok(order)
        }
        Sampling::Balanced => {
            let labels: Vec<Option<usize>> = indices.iter().map(|&i| windows[i].label).collect();
            let sampler = Sampler::new(&balanced_sample_probs(&labels)?)?;
            Ok(sampler.draw(&mut rng, indices.len()).into_iter().map(|k| indices[k]).collect())
        }
    }
}

/// Effective batch size, clamped to the number of windows.
pub fn effective_batch(batch_size: usize, n: usize) -> usize {
    if batch_size > n {
        log::warn!("batch size {batch_size} exceeds {n} training windows; using {n}");
    }
    batch_size.min(n)
}

/// One pass over `indices`: views -> loss -> backward -> Adam -> EMA.
/// The last incomplete batch is dropped.
pub fn pretrain_epoch<T: Scalar>(
    model: &mut ContrastiveModel<T>,
    windows: &[TimeSeriesWindow],
    indices: &[usize],
    cfg: &PretrainConfig,
    adam: &mut AdamState<T>,
    epoch: usize,
) -> Result<EpochReport> {
    let start = Instant::now();
    if indices.is_empty() {
        return Err(Error::invalid("no windows to pretrain on"));
    }
    let bs = effective_batch(cfg.batch_size, indices.len());
    if bs < 2 && model.framework().uses_negatives() {
        return Err(Error::invalid(format!("{} needs a batch of at least 2", model.framework())));
    }
    let order = epoch_order(windows, indices, cfg, epoch as u64)?;
    let params = model.online_parameters();
    let (mut total, mut batches) = (0.0f64, 0usize);
    for (b, chunk) in order.chunks_exact(bs).enumerate() {
        let mut va = Vec::with_capacity(bs);
        let mut vb = Vec::with_capacity(bs);
        for &i in chunk {
            let s = item_seed(cfg.seed, epoch as u64, i as u64);
            let (a, v) = make_views(&windows[i], &cfg.aug1.with_seed(s), &cfg.aug2.with_seed(s ^ 0x5555_5555), cfg.pair_mode)?;
            va.push(a);
            vb.push(v);
        }
        let ta = batch_tensor::<T>(&va.iter().collect::<Vec<_>>())?;
        let tb = batch_tensor::<T>(&vb.iter().collect::<Vec<_>>())?;
        let mut ctx = ForwardCtx::train(item_seed(cfg.seed, epoch as u64, SALT_DROPOUT ^ b as u64));
        model.zero_grad();
        let Some(loss) = model.batch_loss(&ta, &tb, &mut ctx)? else { continue };
        let value = loss.item().to_f64().unwrap_or(f64::NAN);
        if !value.is_finite() {
            return Err(Error::invalid(format!("non-finite loss at epoch {epoch}, batch {b}")));
        }
        loss.backward()?;
        adam.step(&params)?;
        model.after_update()?;
        total += value;
        batches += 1;
    }
    Ok(EpochReport {
        epoch,
        mean_loss: if batches > 0 { total / batches as f64 } else { f64::NAN },
        batches,
        lr: cfg.lr,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

/// Runs `cfg.epochs` epochs, calling `on_epoch` after each.
pub fn pretrain<T: Scalar>(
    model: &mut ContrastiveModel<T>,
    windows: &[TimeSeriesWindow],
    indices: &[usize],
    cfg: &PretrainConfig,
    mut on_epoch: impl FnMut(&EpochReport, &ContrastiveModel<T>) -> Result<()>,
) -> Result<Vec<EpochReport>> {
    let mut adam = AdamState::new(cfg.adam());
    let mut reports = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let r = pretrain_epoch(model, windows, indices, cfg, &mut adam, epoch)?;
        log::info!("epoch {epoch}: loss {:.4} over {} batches", r.mean_loss, r.batches);
        on_epoch(&r, model)?;
        reports.push(r);
    }
    Ok(reports)
}
