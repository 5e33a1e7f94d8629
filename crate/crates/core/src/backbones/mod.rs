//! Encoders `h = f(x)` over `[batch, length, channels]` windows, and the
//! MLP heads stacked on top of them during contrastive pretraining.

mod ae;
mod cnn;
mod config;
mod heads;
mod recurrent;
mod transformer;

use std::path::Path;

pub use config::{EncoderConfig, EncoderKind};
pub use heads::{HeadConfig, MlpHead, PredictorHead, ProjectionHead};
pub use transformer::sinusoidal_encoding;

use crate::data::TimeSeriesWindow;
use crate::error::{Error, Result};
use crate::numcore::{cast, checkpoint, ForwardCtx, Init, Module, Parameter, Scalar, Tensor};

enum Net<T: Scalar> {
    Cnn(cnn::CnnNet<T>),
    Cae(cnn::CnnNet<T>, cnn::CaeDecoder<T>),
    Lstm(recurrent::LstmNet<T>),
    DeepConvLstm(recurrent::DeepConvLstmNet<T>),
    Ae(ae::AeNet<T>),
    Transformer(transformer::TransformerNet<T>),
}

pub struct Encoder<T: Scalar = f32> {
    config: EncoderConfig,
    feature_dim: usize,
    net: Net<T>,
}

/// Output of an autoencoding forward pass.
pub struct Reconstruction<T: Scalar> {
    pub features: Tensor<T>,
    pub reconstruction: Tensor<T>,
    pub loss: Tensor<T>,
}

/// Stacks windows into a `[batch, length, channels]` tensor.
pub fn batch_tensor<T: Scalar>(windows: &[&TimeSeriesWindow]) -> Result<Tensor<T>> {
    let first = windows.first().ok_or_else(|| Error::invalid("empty batch"))?;
    let (l, d) = (first.length, first.channels);
    let mut data = Vec::with_capacity(windows.len() * l * d);
    for w in windows {
        if (w.length, w.channels) != (l, d) {
            return Err(Error::shape("batch_tensor", &[l, d], &[w.length, w.channels]));
        }
        data.extend(w.values.iter().map(|&v| cast::<T>(v as f64)));
    }
    Tensor::new(data, &[windows.len(), l, d])
}

impl<T: Scalar> Encoder<T> {
    pub fn build(config: &EncoderConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut init = Init::new(seed);
        let (net, feature_dim) = match config.kind {
            EncoderKind::Cnn => {
                let n = cnn::CnnNet::new(config, &mut init)?;
                let f = n.feature_dim();
                (Net::Cnn(n), f)
            }
            EncoderKind::Cae => {
                let n = cnn::CnnNet::new(config, &mut init)?;
                let f = n.feature_dim();
                (Net::Cae(n, cnn::CaeDecoder::new(config, &mut init)?), f)
            }
            EncoderKind::Lstm => (Net::Lstm(recurrent::LstmNet::new(config, &mut init)?), config.lstm_hidden),
            EncoderKind::DeepConvLstm => {
                (Net::DeepConvLstm(recurrent::DeepConvLstmNet::new(config, &mut init)?), config.lstm_hidden)
            }
            EncoderKind::Ae => (Net::Ae(ae::AeNet::new(config, &mut init)?), config.ae_bottleneck),
            EncoderKind::Transformer => {
                (Net::Transformer(transformer::TransformerNet::new(config, &mut init)?), config.d_model)
            }
        };
        let enc = Encoder { config: config.clone(), feature_dim, net };
        if let Net::Cae(..) = enc.net {
            // the decoder must invert the encoder's length arithmetic
            let probe = Tensor::<T>::zeros(&[1, config.input_length, config.input_channels]);
            crate::numcore::no_grad(|| enc.reconstruct(&probe, &mut ForwardCtx::eval()))?;
        }
        Ok(enc)
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn kind(&self) -> EncoderKind {
        self.config.kind
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<()> {
        let expected = [x.shape().first().copied().unwrap_or(0), self.config.input_length, self.config.input_channels];
        if x.ndim() != 3 || x.shape()[1..] != expected[1..] {
            return Err(Error::shape("encode", &expected, x.shape()));
        }
        Ok(())
    }

    /// `[B, L, D] -> [B, feature_dim]`. Dropout and batch statistics are
    /// active only when `ctx.train` is set.
    pub fn encode(&self, x: &Tensor<T>, ctx: &mut ForwardCtx) -> Result<Tensor<T>> {
        self.check_input(x)?;
        match &self.net {
            Net::Cnn(n) | Net::Cae(n, _) => n.forward(x, ctx),
            Net::Lstm(n) => n.forward(x),
            Net::DeepConvLstm(n) => n.forward(x, ctx),
            Net::Ae(n) => n.encode(x),
            Net::Transformer(n) => Ok(n.forward_with_attention(x, ctx)?.0),
        }
    }

    /// Features, reconstruction and mean squared reconstruction error.
    pub fn reconstruct(&self, x: &Tensor<T>, ctx: &mut ForwardCtx) -> Result<Reconstruction<T>> {
        self.check_input(x)?;
        let (features, reconstruction) = match &self.net {
            Net::Ae(n) => {
                let z = n.encode(x)?;
                let r = n.decode(&z)?;
                (z, r)
            }
            Net::Cae(enc, dec) => {
                let (map, trace) = enc.forward_map(x, ctx)?;
                let r = dec.forward(&map, &trace, ctx.train, self.config.input_length)?;
                let batch = map.shape()[0];
                (map.reshape(&[batch, enc.feature_dim()])?, r)
            }
            _ => return Err(Error::invalid(format!("`{}` has no decoder", self.config.kind))),
        };
        let loss = reconstruction.sub(x)?.square().mean();
        Ok(Reconstruction { features, reconstruction, loss })
    }

    /// Attention maps of every transformer block.
    pub fn attention_maps(&self, x: &Tensor<T>, ctx: &mut ForwardCtx) -> Result<Vec<Tensor<T>>> {
        self.check_input(x)?;
        match &self.net {
            Net::Transformer(n) => Ok(n.forward_with_attention(x, ctx)?.1),
            _ => Err(Error::invalid(format!("`{}` has no attention", self.config.kind))),
        }
    }

    /// Parameters of the decoder alone (empty for non-autoencoders).
    pub fn decoder_parameters(&self) -> Vec<Parameter<T>> {
        match &self.net {
            Net::Ae(n) => n.decoder_parameters(),
            Net::Cae(_, d) => d.parameters(),
            _ => vec![],
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        checkpoint::save(path, &self.state(), serde_json::json!({ "encoder": self.config }))
    }

    /// Restores a checkpoint written by [`save`](Self::save) for the same config.
    pub fn load(&self, path: &Path) -> Result<()> {
        checkpoint::load(path, &self.state()).map(|_| ())
    }
}

impl<T: Scalar> Module<T> for Encoder<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        match &self.net {
            Net::Cnn(n) => n.parameters(),
            Net::Cae(e, d) => {
                let mut p = e.parameters();
                p.extend(d.parameters());
                p
            }
            Net::Lstm(n) => n.parameters(),
            Net::DeepConvLstm(n) => n.parameters(),
            Net::Ae(n) => n.parameters(),
            Net::Transformer(n) => n.parameters(),
        }
    }

    fn buffers(&self) -> Vec<Parameter<T>> {
        match &self.net {
            Net::Cnn(n) => n.buffers(),
            Net::Cae(e, d) => {
                let mut b = e.buffers();
                b.extend(d.buffers());
                b
            }
            _ => vec![],
        }
    }
}
