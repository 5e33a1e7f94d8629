use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backbones::{batch_tensor, Encoder};
use crate::data::{DatasetSplit, TimeSeriesWindow};
use crate::error::{Error, Result};
use crate::numcore::{no_grad, AdamConfig, AdamState, ForwardCtx, Init, Linear, Module, Parameter, Scalar, Tensor};

/// Fraction of exact matches.
pub fn accuracy(predictions: &[usize], labels: &[usize]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::invalid(format!("{} predictions for {} labels", predictions.len(), labels.len())));
    }
    if labels.is_empty() {
        return Err(Error::invalid("accuracy of an empty set"));
    }
    let hits = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Linear classifier `features -> logits` trained on frozen features.
pub struct LinearHead<T: Scalar = f32> {
    pub linear: Linear<T>,
}

impl<T: Scalar> LinearHead<T> {
    pub fn new(feature_dim: usize, num_classes: usize, seed: u64) -> Result<Self> {
        if feature_dim == 0 || num_classes < 2 {
            return Err(Error::invalid(format!("linear head needs features and >= 2 classes, got {feature_dim}x{num_classes}")));
        }
        Ok(LinearHead { linear: Linear::new("probe", feature_dim, num_classes, true, &mut Init::new(seed))? })
    }

    pub fn logits(&self, features: &Tensor<T>) -> Result<Tensor<T>> {
        self.linear.forward(features)
    }

    pub fn predict(&self, features: &Tensor<T>) -> Result<Vec<usize>> {
        let logits = no_grad(|| self.logits(features))?;
        let k = logits.shape()[1];
        let data = logits.data();
        Ok(data
            .chunks(k)
            .map(|row| (0..k).fold(0, |best, j| if row[j] > row[best] { j } else { best }))
            .collect())
    }
}

impl<T: Scalar> Module<T> for LinearHead<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        self.linear.parameters()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { epochs: 100, lr: 1e-3, batch_size: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub train_accuracy: f64,
    pub validation_accuracy: f64,
    pub test_accuracy: f64,
    /// Epoch (1-based) whose head was kept.
    pub best_epoch: usize,
}

const FEATURE_BATCH: usize = 128;

/// Eval-mode encoder features for `indices`, row-major `[n, feature_dim]`.
pub fn extract_features<T: Scalar>(encoder: &Encoder<T>, windows: &[TimeSeriesWindow], indices: &[usize]) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(indices.len() * encoder.feature_dim());
    no_grad(|| -> Result<()> {
        for chunk in indices.chunks(FEATURE_BATCH) {
            let batch: Vec<&TimeSeriesWindow> = chunk.iter().map(|&i| &windows[i]).collect();
            let h = encoder.encode(&batch_tensor(&batch)?, &mut ForwardCtx::eval())?;
            out.extend_from_slice(&h.data());
        }
        Ok(())
    })?;
    Ok(out)
}

/// Hash over every state tensor's bits; equal before and after probing.
pub fn parameter_checksum<T: Scalar>(module: &impl Module<T>) -> u64 {
    let mut h = DefaultHasher::new();
    for p in module.state() {
        p.name.hash(&mut h);
        for v in p.tensor.data().iter() {
            v.to_f64().unwrap_or(f64::NAN).to_bits().hash(&mut h);
        }
    }
    h.finish()
}

fn labels_of(windows: &[TimeSeriesWindow], indices: &[usize], role: &str) -> Result<Vec<usize>> {
    if indices.is_empty() {
        return Err(Error::Data(format!("{role} split is empty")));
    }
    indices
        .iter()
        .map(|&i| windows[i].label.ok_or_else(|| Error::Data(format!("window {i} in the {role} split has no label"))))
        .collect()
}

struct Features<T: Scalar> {
    x: Tensor<T>,
    y: Vec<usize>,
}

impl<T: Scalar> Features<T> {
    fn gather(encoder: &Encoder<T>, windows: &[TimeSeriesWindow], indices: &[usize], role: &str) -> Result<Self> {
        let y = labels_of(windows, indices, role)?;
        let x = Tensor::new(extract_features(encoder, windows, indices)?, &[indices.len(), encoder.feature_dim()])?;
        Ok(Features { x, y })
    }

    fn rows(&self, idx: &[usize]) -> Result<Tensor<T>> {
        let d = self.x.shape()[1];
        let data = self.x.data();
        let mut out = Vec::with_capacity(idx.len() * d);
        for &i in idx {
            out.extend_from_slice(&data[i * d..(i + 1) * d]);
        }
        Tensor::new(out, &[idx.len(), d])
    }
}

/// Probe accuracies for one train/validation pair and any number of test sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeScores {
    pub train_accuracy: f64,
    pub validation_accuracy: f64,
    pub test_accuracies: Vec<f64>,
    pub best_epoch: usize,
}

/// Trains a [`LinearHead`] on frozen features of the train indices,
/// keeps the epoch with the best validation accuracy and scores it on test.
pub fn linear_evaluate<T: Scalar>(
    encoder: &Encoder<T>,
    windows: &[TimeSeriesWindow],
    split: &DatasetSplit,
    cfg: &ProbeConfig,
    seed: u64,
) -> Result<ProbeResult> {
    let s = probe_encoder(encoder, windows, &split.train, &split.validation, &[&split.test], cfg, seed)?;
    Ok(ProbeResult {
        train_accuracy: s.train_accuracy,
        validation_accuracy: s.validation_accuracy,
        test_accuracy: s.test_accuracies[0],
        best_epoch: s.best_epoch,
    })
}

/// [`linear_evaluate`] with several test sets scored by the same head.
pub fn probe_encoder<T: Scalar>(
    encoder: &Encoder<T>,
    windows: &[TimeSeriesWindow],
    train_idx: &[usize],
    validation_idx: &[usize],
    test_idx: &[&[usize]],
    cfg: &ProbeConfig,
    seed: u64,
) -> Result<ProbeScores> {
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(Error::config("probe.epochs", "epochs and batch_size must be positive"));
    }
    let train = Features::gather(encoder, windows, train_idx, "train")?;
    let val = Features::gather(encoder, windows, validation_idx, "validation")?;
    let tests = test_idx.iter().map(|idx| Features::gather(encoder, windows, idx, "test")).collect::<Result<Vec<_>>>()?;
    let classes = train.y.iter().chain(&val.y).chain(tests.iter().flat_map(|t| &t.y)).max().map_or(0, |m| m + 1).max(2);
    let head = LinearHead::<T>::new(encoder.feature_dim(), classes, seed)?;
    let mut adam = AdamState::new(AdamConfig { lr: cfg.lr, ..AdamConfig::default() });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..train.y.len()).collect();
    let params = head.parameters();
    let mut best: Option<(f64, usize, Vec<Vec<T>>)> = None;
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            head.zero_grad();
            let y: Vec<usize> = chunk.iter().map(|&i| train.y[i]).collect();
            let loss = head.logits(&train.rows(chunk)?)?.cross_entropy(&y)?;
            loss.backward()?;
            adam.step(&params)?;
        }
        let acc = accuracy(&head.predict(&val.x)?, &val.y)?;
        if best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
            best = Some((acc, epoch, params.iter().map(|p| p.tensor.to_vec()).collect()));
        }
    }
    let (validation_accuracy, best_epoch, snapshot) = best.expect("at least one epoch");
    for (p, v) in params.iter().zip(snapshot) {
        p.tensor.data_mut().copy_from_slice(&v);
    }
    Ok(ProbeScores {
        train_accuracy: accuracy(&head.predict(&train.x)?, &train.y)?,
        validation_accuracy,
        test_accuracies: tests.iter().map(|t| accuracy(&head.predict(&t.x)?, &t.y)).collect::<Result<_>>()?,
        best_epoch,
    })
}
