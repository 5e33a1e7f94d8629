use super::config::EncoderConfig;
use crate::error::Result;
use crate::numcore::{Init, Linear, Module, Parameter, Scalar, Tensor};

/// Fully connected autoencoder: per-timestep `D -> c`, then
/// `c L -> 2 L -> bottleneck`, mirrored by the decoder.
pub(crate) struct AeNet<T: Scalar> {
    embed: Linear<T>,
    enc1: Linear<T>,
    enc2: Linear<T>,
    dec2: Linear<T>,
    dec1: Linear<T>,
    unembed: Linear<T>,
    len: usize,
    channel_dim: usize,
}

impl<T: Scalar> AeNet<T> {
    pub fn new(cfg: &EncoderConfig, init: &mut Init) -> Result<Self> {
        let (l, c) = (cfg.input_length, cfg.ae_channel_dim);
        Ok(AeNet {
            embed: Linear::new("encoder.embed", cfg.input_channels, c, true, init)?,
            enc1: Linear::new("encoder.fc1", c * l, 2 * l, true, init)?,
            enc2: Linear::new("encoder.fc2", 2 * l, cfg.ae_bottleneck, true, init)?,
            dec2: Linear::new("decoder.fc2", cfg.ae_bottleneck, 2 * l, true, init)?,
            dec1: Linear::new("decoder.fc1", 2 * l, c * l, true, init)?,
            unembed: Linear::new("decoder.embed", c, cfg.input_channels, true, init)?,
            len: l,
            channel_dim: c,
        })
    }

    pub fn encode(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let batch = x.shape()[0];
        let h = self.embed.forward(x)?.relu().reshape(&[batch, self.len * self.channel_dim])?;
        self.enc2.forward(&self.enc1.forward(&h)?.relu())
    }

    pub fn decode(&self, z: &Tensor<T>) -> Result<Tensor<T>> {
        let batch = z.shape()[0];
        let h = self.dec1.forward(&self.dec2.forward(z)?.relu())?.relu();
        self.unembed.forward(&h.reshape(&[batch, self.len, self.channel_dim])?)
    }

    pub fn decoder_parameters(&self) -> Vec<Parameter<T>> {
        [&self.dec2, &self.dec1, &self.unembed].iter().flat_map(|l| l.parameters()).collect()
    }
}

impl<T: Scalar> Module<T> for AeNet<T> {
    fn parameters(&self) -> Vec<Parameter<T>> {
        let mut p: Vec<_> = [&self.embed, &self.enc1, &self.enc2].iter().flat_map(|l| l.parameters()).collect();
        p.extend(self.decoder_parameters());
        p
    }
}
